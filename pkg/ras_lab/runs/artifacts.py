"""Output directory layout of a run.

Every artifact embeds the config hash and master seed. Wall-clock times stay
out of the files so that a re-run with the same configuration rewrites them
byte for byte.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Tuple

from django.conf import settings

from ras_lab.grids.io import read_grid_csv, read_json_file, write_grid_csv
from ras_lab.grids.values import ValueGrid
from ras_lab.runs.config import RunConfig
from ras_lab.solvers.io import read_policy_csv, write_policy_csv
from ras_lab.solvers.policies import TabularPolicy
from ras_lab.utils.exceptions import DependencyError

logger = logging.getLogger(__name__)

FILES = {
    "h": "h.csv",
    "hg": "hg.csv",
    "v": "v.csv",
    "v_ra": "v_ra.csv",
    "h_q": "h_q.csv",
    "v_q": "v_q.csv",
    "policy_h": "policy_h.csv",
    "policy_v": "policy_v.csv",
    "policy_v_ra": "policy_v_ra.csv",
    "ddpg": "ddpg.json",
    "ddpg_losses": "ddpg_losses.csv",
    "report": "report.json",
    "areas": "areas.json",
    "meta": "meta.json",
}

# Subcommand writing each prerequisite.
PRODUCERS = {
    "h": "solve-h",
    "policy_h": "solve-h",
    "hg": "build-hg",
    "v": "solve-v",
    "policy_v": "solve-v",
    "v_ra": "solve-ra",
    "policy_v_ra": "solve-ra",
    "ddpg": "train-ddpg",
}


class ArtifactStore:
    def __init__(self, config: RunConfig, root: Path = None):
        self.config = config
        self.root = Path(root or getattr(settings, "RAS_OUTPUT_DIR", "") or config.output_dir)

    def path(self, name: str) -> Path:
        return self.root / FILES[name]

    def exists(self, name: str) -> bool:
        return self.path(name).is_file()

    def require(self, name: str) -> Path:
        path = self.path(name)
        if not path.is_file():
            raise DependencyError(
                f"Missing artifact '{path.name}'; run '{PRODUCERS.get(name, name)}' first.",
                {"missing": str(path), "producer": PRODUCERS.get(name)},
            )
        return path

    def stamp(self, **extra) -> Dict[str, Any]:
        return {"config_hash": self.config.config_hash, "seed": self.config.seed, **extra}

    def _check_stamp(self, path: Path, meta: Dict[str, str]):
        if meta.get("config_hash") not in (None, self.config.config_hash):
            logger.warning("%s was written by a different configuration (%s).", path, meta["config_hash"])

    def write_grid(self, name: str, grid: ValueGrid, **extra) -> Path:
        path = write_grid_csv(grid, self.path(name), meta=self.stamp(**extra))
        logger.info("Wrote %s", path)
        return path

    def read_grid(self, name: str) -> ValueGrid:
        path = self.require(name)
        grid, meta = read_grid_csv(path)
        self._check_stamp(path, meta)
        return grid

    def write_policy(self, name: str, policy: TabularPolicy) -> Path:
        path = write_policy_csv(policy, self.path(name), meta=self.stamp())
        logger.info("Wrote %s", path)
        return path

    def read_policy(self, name: str) -> TabularPolicy:
        path = self.require(name)
        policy, meta = read_policy_csv(path)
        self._check_stamp(path, meta)
        return policy

    def write_json(self, name: str, document: Dict[str, Any]) -> Path:
        return self._dump(self.path(name), {"meta": self.stamp(), **document})

    def read_json(self, name: str) -> Dict[str, Any]:
        return read_json_file(self.require(name))

    def record(self, subcommand: str, summary: Dict[str, Any]) -> Path:
        """Merge a subcommand summary into ``meta.json``."""
        path = self.path("meta")
        document = {"runs": {}}
        if path.is_file():
            document = read_json_file(path)
        document.update(self.stamp(benchmark=self.config.benchmark.id, config=self.config.as_dict()))
        document.setdefault("runs", {})[subcommand] = summary
        return self._dump(path, document)

    def trajectory_path(self, policy: str, mode: str, index: int) -> Path:
        return self.root / "traj" / f"{policy}_{mode}_{index:04d}.jsonl"

    def trajectory_paths(self) -> Tuple[Path, ...]:
        return tuple(sorted((self.root / "traj").glob("*_[0-9][0-9][0-9][0-9].jsonl")))

    def simulation_path(self, policy: str, mode: str) -> Path:
        return self.root / "traj" / f"sim_{policy}_{mode}.jsonl"

    def simulation_paths(self) -> Tuple[Path, ...]:
        return tuple(sorted((self.root / "traj").glob("sim_*.jsonl")))

    def export_path(self, name: str) -> Path:
        return self.root / "export" / f"{name}.json"

    def figure_path(self, name: str, extension: str) -> Path:
        path = self.root / "fig" / f"{name}.{extension}"
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def _dump(self, path: Path, document: Dict[str, Any]) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as json_file:
            json.dump(document, json_file, indent=2, sort_keys=True)
            json_file.write("\n")
        logger.info("Wrote %s", path)
        return path
