"""Monte Carlo success rates, initial-state sampling and set areas."""
import json
import logging
from collections import OrderedDict
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

import numpy as np

from ras_lab.grids.io import PathLike
from ras_lab.grids.values import ValueGrid
from ras_lab.simulation.rollout import TrajectoryRecord
from ras_lab.utils.exceptions import SamplingFailureError, ValidationError

logger = logging.getLogger(__name__)

REPORT_FORMAT = "ras-report"
REPORT_FORMAT_VERSION = 1

SAMPLING_BATCH = 4096
# Below this acceptance rate rejection sampling gives up.
ACCEPTANCE_FLOOR = 1e-4
PILOT_DRAWS = 100000


@dataclass
class SuccessCounts:
    total: int = 0
    safe: int = 0
    reach: int = 0
    stay: int = 0
    safe_reach: int = 0
    safe_stay: int = 0

    def add(self, record: TrajectoryRecord):
        safe, reached, stayed = record.safe, record.reached, record.stayed
        self.total += 1
        self.safe += safe
        self.reach += reached
        self.stay += stayed
        self.safe_reach += safe and reached
        self.safe_stay += safe and stayed

    @property
    def rates(self) -> Dict[str, float]:
        counts = asdict(self)
        total = counts.pop("total")
        return {name: count / total for name, count in counts.items()}

    def as_dict(self) -> Dict[str, Any]:
        return {"counts": asdict(self), "rates": self.rates}


@dataclass
class EvalReport:
    """Overall counts plus one entry per ``policy/mode`` pair."""

    overall: SuccessCounts
    breakdown: Dict[str, SuccessCounts] = field(default_factory=OrderedDict)
    meta: Dict[str, Any] = field(default_factory=dict)

    def as_document(self) -> Dict[str, Any]:
        return {
            "format": REPORT_FORMAT,
            "version": REPORT_FORMAT_VERSION,
            "meta": self.meta,
            "overall": self.overall.as_dict(),
            "breakdown": {key: counts.as_dict() for key, counts in self.breakdown.items()},
        }


def evaluate_success(trajectories: Iterable[TrajectoryRecord], meta: Optional[Dict[str, Any]] = None) -> EvalReport:
    trajectories = list(trajectories)
    if not trajectories:
        raise ValidationError("Cannot evaluate an empty set of trajectories.")
    report = EvalReport(overall=SuccessCounts(), meta=dict(meta or {}))
    for record in trajectories:
        report.overall.add(record)
        report.breakdown.setdefault(f"{record.policy}/{record.mode}", SuccessCounts()).add(record)
    for key, counts in report.breakdown.items():
        logger.info("%s: safely reach %.3f, and stay %.3f", key, counts.rates["safe_reach"], counts.rates["safe_stay"])
    return report


def write_report_json(report: EvalReport, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as json_file:
        json.dump(report.as_document(), json_file, indent=2, sort_keys=True)
        json_file.write("\n")
    return path


def sample_initial_states(value: ValueGrid, threshold: float, count: int, seed: int = 0) -> np.ndarray:
    """Uniform rejection sampling of ``{x : value(x) > threshold}`` over the grid box.

    Draws come in fixed-size batches and keep their draw order, so the result
    depends only on ``seed``.
    """
    if count < 1:
        raise ValidationError("Sample count must be at least 1.", {"count": count})
    # interpolated values never exceed the largest node value
    if not value.values.max() > threshold:
        raise SamplingFailureError(
            "No grid value exceeds the threshold.", {"threshold": threshold, "max": float(value.values.max())}
        )
    spec = value.spec
    rng = np.random.default_rng(seed)
    accepted: List[np.ndarray] = []
    n_accepted = drawn = 0
    while n_accepted < count:
        batch = rng.uniform(spec.low, spec.high, (SAMPLING_BATCH, spec.ndim))
        keep = batch[value(batch) > threshold]
        accepted.append(keep)
        n_accepted += len(keep)
        drawn += SAMPLING_BATCH
        if drawn >= PILOT_DRAWS and n_accepted / drawn < ACCEPTANCE_FLOOR:
            raise SamplingFailureError(
                "Acceptance rate fell below the floor.",
                {"threshold": threshold, "accepted": n_accepted, "drawn": drawn, "floor": ACCEPTANCE_FLOOR},
            )
    logger.debug("Accepted %d of %d draws above %.4g.", n_accepted, drawn, threshold)
    return np.concatenate(accepted)[:count]


def node_volumes(value: ValueGrid) -> np.ndarray:
    """Volume owned by each node; nodes on a face of the box own half a cell along that axis."""
    spec = value.spec
    volumes = np.ones(())
    for count, spacing in zip(spec.counts, spec.spacing):
        weights = np.full(count, spacing)
        weights[[0, -1]] /= 2.0
        volumes = np.multiply.outer(volumes, weights)
    return volumes.reshape(-1)


def set_area(value: ValueGrid, threshold: float = 0.0) -> float:
    """Measure of ``{value > threshold}``, counting nodes by the volume they own."""
    return float(node_volumes(value)[value.values > threshold].sum())
