"""Solver and Q-learning settings."""
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence

import numpy as np

from ras_lab.grids.lattice import action_lattice
from ras_lab.grids.values import ValueGrid
from ras_lab.systems.benchmarks import BenchmarkId, SystemModel
from ras_lab.utils.exceptions import ValidationError

SCHEMES = ("jacobi", "gauss-seidel")

# Lattice values per input dimension: (controls, disturbances).
DEFAULT_ACTION_COUNTS = {
    BenchmarkId.CART2D: (11, 9),
    BenchmarkId.CHASE4D: (5, 3),
}


@dataclass(frozen=True, eq=False)
class SolverConfig:
    """Minimax value iteration settings.

    ``control_lattice`` and ``disturbance_lattice`` are 2-D arrays with one
    input vector per row, usually built with :meth:`for_model`.
    """

    control_lattice: np.ndarray
    disturbance_lattice: np.ndarray
    gamma: float = 0.999
    tolerance: float = 1e-6
    max_sweeps: int = 20000
    scheme: str = "jacobi"
    #: Membership threshold for "H = 0", as a fraction of the value range.
    epsilon_fraction: float = 1e-3
    threads: int = 1
    #: Nodes per work unit of a sweep.
    chunk_size: int = 4096
    #: Memory budget for caching interpolation stencils across sweeps.
    stencil_cache_mb: float = 512.0

    def __post_init__(self):
        object.__setattr__(self, "control_lattice", np.atleast_2d(np.asarray(self.control_lattice, dtype=float)))
        object.__setattr__(
            self, "disturbance_lattice", np.atleast_2d(np.asarray(self.disturbance_lattice, dtype=float))
        )
        if not 0 < self.gamma < 1:
            raise ValidationError("gamma must lie in (0, 1).", {"gamma": self.gamma})
        if not self.tolerance > 0:
            raise ValidationError("tolerance must be positive.", {"tolerance": self.tolerance})
        if self.max_sweeps < 1 or self.threads < 1 or self.chunk_size < 1:
            raise ValidationError(
                "max_sweeps, threads and chunk_size must be positive.",
                {"max_sweeps": self.max_sweeps, "threads": self.threads, "chunk_size": self.chunk_size},
            )
        if self.scheme not in SCHEMES:
            raise ValidationError(f"Unknown sweep scheme '{self.scheme}'.", {"choices": list(SCHEMES)})
        if self.epsilon_fraction < 0:
            raise ValidationError("epsilon_fraction must be non-negative.", {"epsilon_fraction": self.epsilon_fraction})

    @classmethod
    def for_model(
        cls,
        model: SystemModel,
        control_counts: Optional[Sequence[int]] = None,
        disturbance_counts: Optional[Sequence[int]] = None,
        **kwargs,
    ) -> "SolverConfig":
        default_controls, default_disturbances = DEFAULT_ACTION_COUNTS[model.benchmark_id]
        control_counts = control_counts or (default_controls,) * model.control_dim
        disturbance_counts = disturbance_counts or (default_disturbances,) * model.disturbance_dim
        return cls(
            control_lattice=action_lattice(model.control_bounds, control_counts),
            disturbance_lattice=action_lattice(model.disturbance_bounds, disturbance_counts),
            **kwargs,
        )

    @property
    def n_controls(self) -> int:
        return len(self.control_lattice)

    @property
    def n_disturbances(self) -> int:
        return len(self.disturbance_lattice)

    def epsilon(self, grid: ValueGrid) -> float:
        return self.epsilon_fraction * grid.value_range

    def describe(self) -> Dict[str, Any]:
        return {
            "gamma": self.gamma,
            "tolerance": self.tolerance,
            "max_sweeps": self.max_sweeps,
            "scheme": self.scheme,
            "epsilon_fraction": self.epsilon_fraction,
            "controls": len(self.control_lattice),
            "disturbances": len(self.disturbance_lattice),
        }


@dataclass(frozen=True)
class QLearnConfig:
    """Sampled tabular Q-learning schedule.

    Each episode draws ``horizon`` blocks of ``batch_size`` (node, control,
    disturbance) triples and applies them one update at a time. The learning
    rate of update ``k`` is ``initial_rate / (1 + k / decay)``. The default
    schedule runs about two billion updates, sized for the cart benchmark on
    its default grid.
    """

    initial_rate: float = 1.0
    decay: float = 1.0e9
    episodes: int = 500
    horizon: int = 1000
    batch_size: int = 4096
    #: Fraction of triples drawn uniformly; the rest hit the node's saddle pair at draw time.
    exploration: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.initial_rate <= 1:
            raise ValidationError("initial_rate must lie in (0, 1].", {"initial_rate": self.initial_rate})
        if not 0 < self.exploration <= 1:
            raise ValidationError("exploration must lie in (0, 1].", {"exploration": self.exploration})
        if self.decay <= 0:
            raise ValidationError("decay must be positive.", {"decay": self.decay})
        if min(self.episodes, self.horizon, self.batch_size) < 1:
            raise ValidationError(
                "episodes, horizon and batch_size must be positive.",
                {"episodes": self.episodes, "horizon": self.horizon, "batch_size": self.batch_size},
            )

    @property
    def total_batches(self) -> int:
        return self.episodes * self.horizon

    def rate(self, update: int) -> float:
        return self.initial_rate / (1.0 + update / self.decay)

    def rates(self, start: int, count: int) -> np.ndarray:
        """Rates of updates ``start`` to ``start + count - 1``."""
        return self.initial_rate / (1.0 + (start + np.arange(count, dtype=float)) / self.decay)

    @property
    def total_updates(self) -> int:
        return self.total_batches * self.batch_size
