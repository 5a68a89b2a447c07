"""State-to-input maps extracted from solved value grids."""
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from ras_lab.grids.lattice import GridSpec
from ras_lab.grids.values import ValueGrid
from ras_lab.solvers.games import minimax_at

if TYPE_CHECKING:
    from ras_lab.solvers.config import SolverConfig
    from ras_lab.systems.benchmarks import SystemModel


@dataclass(frozen=True, eq=False)
class TabularPolicy:
    """Greedy minimax control per node with its companion adversarial disturbance.

    Off-grid states use the nearest node.
    """

    spec: GridSpec
    control_lattice: np.ndarray
    disturbance_lattice: np.ndarray
    control_index: np.ndarray
    disturbance_index: np.ndarray
    label: str = ""

    @property
    def controls(self) -> np.ndarray:
        return self.control_lattice[self.control_index]

    @property
    def disturbances(self) -> np.ndarray:
        return self.disturbance_lattice[self.disturbance_index]

    def nearest_node(self, x) -> int:
        clipped = np.clip(np.asarray(x, dtype=float), self.spec.low, self.spec.high)
        scaled = (clipped - self.spec.low) / self.spec.spacing
        index = np.clip(np.rint(scaled).astype(np.intp), 0, np.asarray(self.spec.counts) - 1)
        return int(np.dot(index, self.spec.strides))

    def control(self, x) -> np.ndarray:
        return self.control_lattice[self.control_index[self.nearest_node(x)]]

    def adversary(self, x, u=None) -> np.ndarray:
        return self.disturbance_lattice[self.disturbance_index[self.nearest_node(x)]]


class LookaheadPolicy:
    """Evaluates the argmax-min rule directly at the queried state.

    Same tie-breaking as :func:`extract_policy`; the adversary answers the
    given control with the lattice disturbance minimizing the successor value.
    """

    def __init__(self, model: "SystemModel", value: ValueGrid, config: "SolverConfig", label: str = ""):
        self.model = model
        self.value = value
        self.config = config
        self.label = label or (f"pi_{value.label}" if value.label else "")

    def control(self, x) -> np.ndarray:
        _, control, _ = minimax_at(self.model, self.value, x, self.config)
        return self.config.control_lattice[control]

    def adversary(self, x, u=None) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        u = self.control(x) if u is None else np.asarray(u, dtype=float)
        lattice = self.config.disturbance_lattice
        successors = self.model.step_batch(
            np.broadcast_to(x, (len(lattice), x.size)), np.broadcast_to(u, (len(lattice), u.size)), lattice
        )
        return lattice[int(np.argmin(self.value(successors)))]
