"""Closed-loop trajectory simulation and its line-delimited JSON format."""
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ras_lab.grids.io import PathLike, reads_artifact
from ras_lab.simulation.policies import SwitchingPolicy
from ras_lab.systems.benchmarks import SystemModel
from ras_lab.utils.exceptions import ArtifactError, ContractViolationError, ValidationError

logger = logging.getLogger(__name__)

TRAJECTORY_FORMAT = "ras-trajectory"
TRAJECTORY_FORMAT_VERSION = 1


class DisturbanceMode(str, Enum):
    ADVERSARIAL = "adversarial"
    RANDOM = "random"
    ZERO = "zero"


def trajectory_seed(master_seed: int, index: int) -> int:
    return int(master_seed) ^ int(index)


@dataclass
class TrajectoryRecord:
    """States ``x_0 .. x_T`` with the inputs applied between them.

    ``g``, ``l``, ``hg`` and ``branches`` are logged at every state; ``hg`` and
    ``branches`` are ``None`` for policies without a switching rule.
    """

    states: np.ndarray
    controls: np.ndarray
    disturbances: np.ndarray
    g: np.ndarray
    l: np.ndarray  # noqa E741
    hg: Optional[np.ndarray]
    branches: Optional[List[str]]
    seed: int
    mode: str
    policy: str = ""

    @property
    def initial_state(self) -> np.ndarray:
        return self.states[0]

    @property
    def horizon(self) -> int:
        return len(self.controls)

    @property
    def safe(self) -> bool:
        return bool(np.all(self.l > 0))

    @property
    def reached(self) -> bool:
        return bool(np.any(self.g > 0))

    @property
    def stayed(self) -> bool:
        return self.stay_time is not None

    @property
    def reach_time(self) -> Optional[int]:
        inside = np.flatnonzero(self.g > 0)
        return int(inside[0]) if inside.size else None

    @property
    def stay_time(self) -> Optional[int]:
        """First step from which ``g > 0`` holds up to the horizon."""
        outside = np.flatnonzero(self.g <= 0)
        if outside.size == 0:
            return 0
        if outside[-1] == len(self.g) - 1:
            return None
        return int(outside[-1]) + 1


def rollout(
    model: SystemModel,
    policy,
    disturbance_mode: DisturbanceMode,
    x0,
    horizon: int,
    seed: int = 0,
) -> TrajectoryRecord:
    """Simulate ``x_{t+1} = f(x_t, pi(x_t), d_t)`` for ``horizon`` steps.

    Adversarial disturbances come from ``policy.adversary``; random ones are
    uniform over the disturbance bounds.
    """
    if horizon < 1:
        raise ValidationError("Horizon must be at least 1.", {"horizon": horizon})
    mode = DisturbanceMode(disturbance_mode)
    rng = np.random.default_rng(seed)
    bounds = model.disturbance_bounds
    switching = isinstance(policy, SwitchingPolicy)

    states = np.empty((horizon + 1, model.state_dim))
    controls = np.empty((horizon, model.control_dim))
    disturbances = np.empty((horizon, model.disturbance_dim))
    hg = np.empty(horizon + 1) if switching else None
    branches: Optional[List[str]] = [] if switching else None
    states[0] = model._check_state(x0)

    for t in range(horizon + 1):
        x = states[t]
        active = policy
        if switching:
            hg[t] = policy.hg_value(x)
            branches.append(policy.branch(x, hg[t]))
            active = policy.reach if hg[t] <= 0 else policy.stay
        if t == horizon:
            break
        u = np.asarray(active.control(x), dtype=float).reshape(model.control_dim)
        if not model.control_bounds.contains(u):
            raise ContractViolationError(
                "Policy returned a control outside its bounds.",
                {"policy": getattr(policy, "label", ""), "step": t, "state": x.tolist(), "control": u.tolist()},
            )
        if mode is DisturbanceMode.ADVERSARIAL:
            d = bounds.clip(np.asarray(active.adversary(x, u), dtype=float).reshape(model.disturbance_dim))
        elif mode is DisturbanceMode.RANDOM:
            d = rng.uniform(bounds.low, bounds.high)
        else:
            d = np.zeros(model.disturbance_dim)
        controls[t], disturbances[t] = u, d
        states[t + 1] = model.step(x, u, d)

    return TrajectoryRecord(
        states=states,
        controls=controls,
        disturbances=disturbances,
        g=model.target_reward_g(states),
        l=model.constraint_l(states),
        hg=hg,
        branches=branches,
        seed=seed,
        mode=mode.value,
        policy=getattr(policy, "label", ""),
    )


def rollout_many(
    model: SystemModel,
    policy,
    disturbance_mode: DisturbanceMode,
    initial_states: Sequence,
    horizon: int,
    master_seed: int = 0,
    threads: int = 1,
) -> List[TrajectoryRecord]:
    """Independent rollouts; trajectory ``i`` is seeded with ``master_seed ^ i``."""

    def run(item: Tuple[int, Any]) -> TrajectoryRecord:
        index, x0 = item
        return rollout(model, policy, disturbance_mode, x0, horizon, trajectory_seed(master_seed, index))

    items = list(enumerate(np.asarray(initial_states, dtype=float)))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            records = list(executor.map(run, items))
    else:
        records = [run(item) for item in items]
    logger.info(
        "Simulated %d trajectories of %s under %s disturbances.",
        len(records),
        getattr(policy, "label", "") or "policy",
        DisturbanceMode(disturbance_mode).value,
    )
    return records


def _optional_list(values, index):
    return None if values is None or index >= len(values) else values[index].tolist()


def write_trajectory_jsonl(record: TrajectoryRecord, path: PathLike, meta: Optional[Dict[str, Any]] = None) -> Path:
    """Header line, then one line per state."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "format": TRAJECTORY_FORMAT,
        "version": TRAJECTORY_FORMAT_VERSION,
        "meta": dict(meta or {}),
        "policy": record.policy,
        "mode": record.mode,
        "seed": record.seed,
        "horizon": record.horizon,
        "initial_state": record.initial_state.tolist(),
    }
    with open(path, "w") as jsonl_file:
        jsonl_file.write(json.dumps(header, sort_keys=True) + "\n")
        for t, state in enumerate(record.states):
            step = {
                "t": t,
                "state": state.tolist(),
                "control": _optional_list(record.controls, t),
                "disturbance": _optional_list(record.disturbances, t),
                "g": float(record.g[t]),
                "l": float(record.l[t]),
                "hg": None if record.hg is None else float(record.hg[t]),
                "branch": None if record.branches is None else record.branches[t],
            }
            jsonl_file.write(json.dumps(step, sort_keys=True) + "\n")
    return path


@reads_artifact
def read_trajectory_jsonl(path: PathLike) -> Tuple[TrajectoryRecord, Dict[str, Any]]:
    with open(path) as jsonl_file:
        lines = [json.loads(line) for line in jsonl_file if line.strip()]
    if not lines or lines[0].get("format") != TRAJECTORY_FORMAT:
        raise ArtifactError("Not a trajectory file.", {"path": str(path)})
    header, steps = lines[0], lines[1:]
    if len(steps) != header["horizon"] + 1:
        raise ArtifactError(
            "Trajectory file is truncated.", {"path": str(path), "expected": header["horizon"] + 1, "found": len(steps)}
        )
    has_hg = steps[0]["hg"] is not None
    record = TrajectoryRecord(
        states=np.array([step["state"] for step in steps], dtype=float),
        controls=np.array([step["control"] for step in steps[:-1]], dtype=float),
        disturbances=np.array([step["disturbance"] for step in steps[:-1]], dtype=float),
        g=np.array([step["g"] for step in steps]),
        l=np.array([step["l"] for step in steps]),
        hg=np.array([step["hg"] for step in steps]) if has_hg else None,
        branches=[step["branch"] for step in steps] if has_hg else None,
        seed=header["seed"],
        mode=header["mode"],
        policy=header["policy"],
    )
    return record, header["meta"]
