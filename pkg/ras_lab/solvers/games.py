"""Finite zero-sum games the tabular solvers iterate over.

A game has ``n_nodes`` states, ``n_controls`` maximizer actions and
``n_disturbances`` minimizer actions. The successor of a (node, control,
disturbance) triple is a convex combination of nodes given by a stencil of
node indices and weights: a single node for explicitly tabulated games, the
``2**n`` corners of the enclosing cell for games built on a value grid.
"""
import logging
from abc import ABC, abstractmethod
from functools import lru_cache
from typing import Dict, Tuple

import numpy as np

from ras_lab.grids.lattice import GridSpec, node_states
from ras_lab.grids.values import ValueGrid, interpolate_many, stencil
from ras_lab.solvers.config import SolverConfig
from ras_lab.systems.benchmarks import SystemModel
from ras_lab.utils.exceptions import ValidationError

logger = logging.getLogger(__name__)


class FiniteGame(ABC):
    n_nodes: int
    n_controls: int
    n_disturbances: int

    @abstractmethod
    def stencil(
        self, nodes: np.ndarray, controls: np.ndarray, disturbances: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Successor stencils of equally shaped index arrays.

        Returns ``(indices, weights)`` with one extra trailing axis.
        """

    def chunk_stencil(self, start: int, stop: int) -> Tuple[np.ndarray, np.ndarray]:
        """Stencils of every action pair for nodes ``start:stop``, shaped ``(k, A, B, C)``."""
        shape = (stop - start, self.n_controls, self.n_disturbances)
        nodes, controls, disturbances = np.meshgrid(
            np.arange(start, stop), np.arange(self.n_controls), np.arange(self.n_disturbances), indexing="ij"
        )
        indices, weights = self.stencil(nodes.reshape(-1), controls.reshape(-1), disturbances.reshape(-1))
        return indices.reshape(shape + indices.shape[-1:]), weights.reshape(shape + weights.shape[-1:])

    def successor_values(self, values: np.ndarray, start: int, stop: int) -> np.ndarray:
        """Successor values of nodes ``start:stop`` for every action pair, ``(k, A, B)``."""
        indices, weights = self.chunk_stencil(start, stop)
        return np.sum(values[indices] * weights, axis=-1)


class TableGame(FiniteGame):
    """Deterministic game given by an explicit ``(N, A, B)`` successor table."""

    def __init__(self, successors: np.ndarray):
        successors = np.asarray(successors, dtype=np.intp)
        if successors.ndim != 3:
            raise ValidationError("Successor table must have shape (nodes, controls, disturbances).")
        self.n_nodes, self.n_controls, self.n_disturbances = successors.shape
        if np.any(successors < 0) or np.any(successors >= self.n_nodes):
            raise ValidationError("Successor table references unknown nodes.")
        self.successors = successors

    def stencil(self, nodes, controls, disturbances):
        indices = self.successors[nodes, controls, disturbances][..., None]
        return indices, np.ones(indices.shape)


class GridGame(FiniteGame):
    """Lattice discretization of a :class:`SystemModel` on a grid.

    Successor states leave the grid through clamping. Stencils of whole
    chunks are cached while they fit the configured memory budget, since they
    do not change between sweeps.
    """

    def __init__(self, model: SystemModel, spec: GridSpec, config: SolverConfig):
        if spec.ndim != model.state_dim:
            raise ValidationError(
                "Grid dimension does not match the model.",
                {"grid": spec.ndim, "model": model.state_dim},
            )
        self.model = model
        self.spec = spec
        self.config = config
        self.n_nodes = spec.size
        self.n_controls = config.n_controls
        self.n_disturbances = config.n_disturbances
        corners = 2 ** spec.ndim
        # int32 index plus float64 weight per corner
        footprint = self.n_nodes * self.n_controls * self.n_disturbances * corners * 12
        self.cache_enabled = footprint <= config.stencil_cache_mb * 2 ** 20
        self._cache: Dict[Tuple[int, int], Tuple[np.ndarray, np.ndarray]] = {}
        logger.debug(
            "Grid game: %d nodes, %d x %d actions, stencil cache %s (%.0f MB).",
            self.n_nodes,
            self.n_controls,
            self.n_disturbances,
            "on" if self.cache_enabled else "off",
            footprint / 2 ** 20,
        )

    def successor_states(self, nodes, controls, disturbances) -> np.ndarray:
        states = node_states(self.spec, nodes)
        return self.model.step_batch(
            states, self.config.control_lattice[controls], self.config.disturbance_lattice[disturbances]
        )

    def stencil(self, nodes, controls, disturbances):
        return stencil(self.spec, self.successor_states(nodes, controls, disturbances))

    def chunk_stencil(self, start, stop):
        key = (start, stop)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        indices, weights = super().chunk_stencil(start, stop)
        if self.cache_enabled:
            indices = indices.astype(np.int32)
            self._cache[key] = (indices, weights)
        return indices, weights


def game_tree_value(
    game: TableGame,
    node: int,
    depth: int,
    gamma: float,
    upper: np.ndarray,
    lower: np.ndarray,
    leaf: np.ndarray,
) -> float:
    """Exhaustive depth-limited minimax evaluation of a tabulated game.

    Each level applies ``min(upper, max(lower, gamma * max_u min_d value))``
    and the recursion bottoms out at ``leaf``; with ``leaf`` equal to the
    initial iterate this is the value iteration after ``depth`` sweeps.
    """

    @lru_cache(maxsize=None)
    def evaluate(current: int, remaining: int) -> float:
        if remaining == 0:
            return float(leaf[current])
        best = -np.inf
        for control in range(game.n_controls):
            worst = np.inf
            for disturbance in range(game.n_disturbances):
                worst = min(worst, evaluate(int(game.successors[current, control, disturbance]), remaining - 1))
            best = max(best, worst)
        return float(min(upper[current], max(lower[current], gamma * best)))

    for level in range(depth + 1):
        # bottom-up warm-up keeps the recursion shallow
        for state in range(game.n_nodes):
            evaluate(state, level)
    return evaluate(int(node), depth)


def successor_matrix(model: SystemModel, value: ValueGrid, x, config: SolverConfig) -> np.ndarray:
    """Interpolated successor values of ``x`` for every lattice pair, ``(A, B)``."""
    x = np.asarray(x, dtype=float)
    n_controls, n_disturbances = config.n_controls, config.n_disturbances
    states = np.broadcast_to(x, (n_controls, n_disturbances, x.size))
    controls = np.broadcast_to(config.control_lattice[:, None, :], (n_controls, n_disturbances, model.control_dim))
    disturbances = np.broadcast_to(
        config.disturbance_lattice[None, :, :], (n_controls, n_disturbances, model.disturbance_dim)
    )
    return interpolate_many(value, model.step_batch(states, controls, disturbances))


def minimax_at(model: SystemModel, value: ValueGrid, x, config: SolverConfig) -> Tuple[float, int, int]:
    """``max_u min_d value(f(x, u, d))`` at an arbitrary state, with the saddle indices."""
    successors = successor_matrix(model, value, x, config)
    control = int(np.argmax(successors.min(axis=1)))
    disturbance = int(np.argmin(successors[control]))
    return float(successors[control, disturbance]), control, disturbance
