"""Sampled tabular Q-learning of the H and V fixed points.

The Q table is indexed by (node, control, disturbance); node values are
``max_u min_d Q``. Triples are drawn uniformly and applied one at a time, so
every target reads the values left by the update before it. Targets use the
same backup as value iteration, so the learned values approach the
value-iteration oracle as the schedule runs.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from numba import njit

from ras_lab.grids.lattice import GridSpec, node_states
from ras_lab.grids.values import ValueGrid
from ras_lab.solvers.config import QLearnConfig, SolverConfig
from ras_lab.solvers.games import FiniteGame, GridGame
from ras_lab.systems.benchmarks import SystemModel
from ras_lab.utils.exceptions import ValidationError

logger = logging.getLogger(__name__)


@dataclass
class QLearningOutcome:
    values: np.ndarray
    q_table: np.ndarray
    #: Mean absolute temporal-difference error per episode.
    td_errors: List[float] = field(default_factory=list)


@njit(cache=True)
def _apply_updates(
    q_table, row_min, values, upper, lower, nodes, controls, disturbances, indices, weights, rates, gamma
):
    """Sequential Q updates of one block of sampled triples.

    ``indices`` and ``weights`` hold the successor stencil of each sample.
    Returns the summed absolute temporal-difference error.
    """
    total = 0.0
    n_controls = q_table.shape[1]
    n_disturbances = q_table.shape[2]
    for s in range(nodes.shape[0]):
        node, control, disturbance = nodes[s], controls[s], disturbances[s]
        continuation = 0.0
        for k in range(indices.shape[1]):
            continuation += values[indices[s, k]] * weights[s, k]
        target = min(upper[node], max(lower[node], gamma * continuation))
        delta = target - q_table[node, control, disturbance]
        q_table[node, control, disturbance] += rates[s] * delta
        worst = q_table[node, control, 0]
        for b in range(1, n_disturbances):
            worst = min(worst, q_table[node, control, b])
        row_min[node, control] = worst
        best = row_min[node, 0]
        for a in range(1, n_controls):
            best = max(best, row_min[node, a])
        values[node] = best
        total += abs(delta)
    return total


def _stencil_table(game: FiniteGame) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """Stencils of every triple, flattened to ``(N * A * B, C)``, when they fit the cache budget."""
    if isinstance(game, GridGame) and not game.cache_enabled:
        return None
    indices, weights = game.chunk_stencil(0, game.n_nodes)
    corners = indices.shape[-1]
    return np.ascontiguousarray(indices.reshape(-1, corners)), np.ascontiguousarray(weights.reshape(-1, corners))


def _saddle_pairs(q_table: np.ndarray, nodes: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    rows = q_table[nodes]
    controls = np.argmax(rows.min(axis=2), axis=1)
    return controls, np.argmin(rows[np.arange(len(nodes)), controls], axis=1)


def q_learning(
    game: FiniteGame,
    upper: np.ndarray,
    lower: np.ndarray,
    initial: np.ndarray,
    gamma: float,
    qconfig: QLearnConfig,
) -> QLearningOutcome:
    """Asynchronous minimax Q-learning with one update per sampled triple.

    Triples are drawn in blocks of ``batch_size`` with the seeded generator
    and applied in draw order. With ``exploration < 1`` the remaining triples
    take the saddle pair of their node as it stood when the block was drawn.
    """
    rng = np.random.default_rng(qconfig.seed)
    upper = np.ascontiguousarray(upper, dtype=float)
    lower = np.ascontiguousarray(lower, dtype=float)
    q_table = np.repeat(
        np.asarray(initial, dtype=float)[:, None, None], game.n_controls * game.n_disturbances, axis=1
    ).reshape(game.n_nodes, game.n_controls, game.n_disturbances)
    row_min = q_table.min(axis=2)
    values = row_min.max(axis=1)
    outcome = QLearningOutcome(values=values, q_table=q_table)
    table = _stencil_table(game)
    size = qconfig.batch_size
    pairs = game.n_controls * game.n_disturbances

    updates = 0
    for episode in range(qconfig.episodes):
        error = 0.0
        for _ in range(qconfig.horizon):
            nodes = rng.integers(0, game.n_nodes, size)
            controls = rng.integers(0, game.n_controls, size)
            disturbances = rng.integers(0, game.n_disturbances, size)
            if qconfig.exploration < 1.0:
                greedy = rng.random(size) >= qconfig.exploration
                if greedy.any():
                    controls[greedy], disturbances[greedy] = _saddle_pairs(q_table, nodes[greedy])
            if table is None:
                indices, weights = game.stencil(nodes, controls, disturbances)
            else:
                flat = (nodes * pairs) + controls * game.n_disturbances + disturbances
                indices, weights = table[0][flat], table[1][flat]
            rates = qconfig.rates(updates, size)
            error += _apply_updates(
                q_table, row_min, values, upper, lower, nodes, controls, disturbances, indices, weights, rates, gamma
            )
            updates += size
        outcome.td_errors.append(error / (qconfig.horizon * size))
        logger.debug("Q-learning episode %d: mean |td| %.3e", episode, outcome.td_errors[-1])
    logger.info("Q-learning finished %d updates (final mean |td| %.3e).", updates, outcome.td_errors[-1])
    return outcome


def q_learning_H(model: SystemModel, spec: GridSpec, qconfig: QLearnConfig, config: SolverConfig) -> ValueGrid:
    """Learn H from sampled minimax updates with the H backup target."""
    game = GridGame(model, spec, config)
    gbar = model.gbar(node_states(spec))
    outcome = q_learning(
        game,
        upper=gbar,
        lower=np.full(spec.size, -np.inf),
        initial=np.minimum(gbar, 0.0),
        gamma=config.gamma,
        qconfig=qconfig,
    )
    return ValueGrid(spec, outcome.values, "H_q")


def q_learning_V(
    model: SystemModel, spec: GridSpec, Hg: ValueGrid, qconfig: QLearnConfig, config: SolverConfig
) -> ValueGrid:
    """Learn V against a fixed H_g."""
    if Hg.spec != spec:
        raise ValidationError("H_g lives on a different grid.", {"hg": Hg.spec.as_dict(), "grid": spec.as_dict()})
    game = GridGame(model, spec, config)
    avoid = model.constraint_l(node_states(spec))
    outcome = q_learning(
        game,
        upper=avoid,
        lower=Hg.values,
        initial=np.minimum(avoid, Hg.values),
        gamma=config.gamma,
        qconfig=qconfig,
    )
    return ValueGrid(spec, outcome.values, "V_q")
