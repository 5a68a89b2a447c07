"""Minimax value iteration for the H, H_g, V and V_RA value functions.

All four fixed points share one backup shape,

    W(x) = min(upper(x), max(lower(x), gamma * max_u min_d W(f(x, u, d)))),

with ``upper = gbar, lower = -inf`` for H, ``upper = l, lower = H_g`` for V and
``upper = l, lower = g`` for the reach-avoid baseline V_RA.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ras_lab.grids.lattice import GridSpec, node_states
from ras_lab.grids.values import ValueGrid, interpolate_many
from ras_lab.solvers.config import SolverConfig
from ras_lab.solvers.games import FiniteGame, GridGame, minimax_at
from ras_lab.solvers.policies import TabularPolicy
from ras_lab.systems.benchmarks import SystemModel
from ras_lab.utils.exceptions import NonConvergenceError, ValidationError

logger = logging.getLogger(__name__)


@dataclass
class ConvergenceReport:
    sweeps: int = 0
    residuals: List[float] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def final_residual(self) -> float:
        return self.residuals[-1] if self.residuals else float("inf")

    def describe(self) -> Dict[str, Any]:
        """Deterministic summary (wall time is reported separately)."""
        return {"sweeps": self.sweeps, "final_residual": self.final_residual, "residuals": list(self.residuals)}


@dataclass
class Solution:
    value: ValueGrid
    policy: TabularPolicy
    report: ConvergenceReport

    def __iter__(self):
        # allows ``value, policy = solve_H(...)``
        return iter((self.value, self.policy))


def _chunks(n_nodes: int, chunk_size: int) -> List[Tuple[int, int]]:
    return [(start, min(start + chunk_size, n_nodes)) for start in range(0, n_nodes, chunk_size)]


def minimax_backup(
    game: FiniteGame,
    values: np.ndarray,
    upper: np.ndarray,
    lower: np.ndarray,
    gamma: float,
    start: int,
    stop: int,
) -> np.ndarray:
    successors = game.successor_values(values, start, stop)
    continuation = gamma * successors.min(axis=2).max(axis=1)
    return np.minimum(upper[start:stop], np.maximum(lower[start:stop], continuation))


def value_iteration(
    game: FiniteGame,
    upper: np.ndarray,
    lower: np.ndarray,
    initial: np.ndarray,
    config: SolverConfig,
    label: str = "",
    sweeps: Optional[int] = None,
) -> Tuple[np.ndarray, ConvergenceReport]:
    """Iterate the minimax backup to its fixed point.

    Jacobi sweeps evaluate node chunks in parallel against the previous
    iterate and synchronize once per sweep. Gauss-Seidel sweeps run chunks in
    order and reuse the values already updated in the sweep. With ``sweeps``
    set, exactly that many sweeps run and no convergence check is made.
    """
    values = np.array(initial, dtype=float)
    upper = np.asarray(upper, dtype=float)
    lower = np.asarray(lower, dtype=float)
    chunks = _chunks(game.n_nodes, config.chunk_size)
    report = ConvergenceReport()
    started = time.perf_counter()
    cap = sweeps if sweeps is not None else config.max_sweeps
    gauss_seidel = config.scheme == "gauss-seidel"

    with ThreadPoolExecutor(max_workers=config.threads) as executor:
        for sweep in range(1, cap + 1):
            previous = values
            if gauss_seidel:
                values = values.copy()
                for start, stop in chunks:
                    values[start:stop] = minimax_backup(game, values, upper, lower, config.gamma, start, stop)
            else:
                updated = np.empty_like(values)
                parts = executor.map(
                    lambda bounds: minimax_backup(game, previous, upper, lower, config.gamma, *bounds), chunks
                )
                for (start, stop), part in zip(chunks, parts):
                    updated[start:stop] = part
                values = updated
            residual = float(np.max(np.abs(values - previous)))
            report.residuals.append(residual)
            report.sweeps = sweep
            logger.debug("%s sweep %d: residual %.3e", label or "value", sweep, residual)
            if sweeps is None and residual <= config.tolerance:
                break
    report.wall_time = time.perf_counter() - started

    if sweeps is None and report.final_residual > config.tolerance:
        raise NonConvergenceError(
            f"{label or 'Value'} iteration did not converge within {config.max_sweeps} sweeps.",
            {"final_residual": report.final_residual, "sweeps": report.sweeps, "tolerance": config.tolerance},
        )
    logger.info(
        "%s converged after %d sweeps (residual %.3e, %.1fs).",
        label or "Value",
        report.sweeps,
        report.final_residual,
        report.wall_time,
    )
    return values, report


def greedy_indices(game: FiniteGame, values: np.ndarray, config: SolverConfig) -> Tuple[np.ndarray, np.ndarray]:
    """Argmax-min control and its inner minimizing disturbance per node.

    Ties go to the lowest lattice index.
    """
    control_index = np.empty(game.n_nodes, dtype=np.intp)
    disturbance_index = np.empty(game.n_nodes, dtype=np.intp)
    for start, stop in _chunks(game.n_nodes, config.chunk_size):
        successors = game.successor_values(values, start, stop)
        best = np.argmax(successors.min(axis=2), axis=1)
        control_index[start:stop] = best
        disturbance_index[start:stop] = np.argmin(successors[np.arange(stop - start), best], axis=1)
    return control_index, disturbance_index


def extract_policy(
    model: SystemModel, value: ValueGrid, config: SolverConfig, game: Optional[GridGame] = None
) -> TabularPolicy:
    game = game or GridGame(model, value.spec, config)
    control_index, disturbance_index = greedy_indices(game, value.values, config)
    return TabularPolicy(
        spec=value.spec,
        control_lattice=config.control_lattice,
        disturbance_lattice=config.disturbance_lattice,
        control_index=control_index,
        disturbance_index=disturbance_index,
        label=f"pi_{value.label}" if value.label else "",
    )


def bellman_backup_H(model: SystemModel, H: ValueGrid, x, config: SolverConfig) -> float:
    continuation, _, _ = minimax_at(model, H, x, config)
    return float(min(model.gbar(np.asarray(x, dtype=float)), config.gamma * continuation))


def bellman_backup_V(model: SystemModel, V: ValueGrid, Hg: ValueGrid, x, config: SolverConfig) -> float:
    x = np.asarray(x, dtype=float)
    continuation, _, _ = minimax_at(model, V, x, config)
    reach = float(interpolate_many(Hg, x.reshape(1, -1))[0])
    return float(min(model.constraint_l(x), max(reach, config.gamma * continuation)))


def _check_spec(model: SystemModel, spec: GridSpec):
    if spec.ndim != model.state_dim:
        raise ValidationError(
            "Grid dimension does not match the model.", {"grid": spec.ndim, "model": model.state_dim}
        )


def solve_H(model: SystemModel, spec: GridSpec, config: SolverConfig) -> Solution:
    """Viability-kernel value H; its zero level set is the robust kernel in T minus C.

    Starts from ``min(gbar, 0)`` so every iterate stays non-positive and
    decreases monotonically.
    """
    _check_spec(model, spec)
    game = GridGame(model, spec, config)
    gbar = model.gbar(node_states(spec))
    values, report = value_iteration(
        game, upper=gbar, lower=np.full(spec.size, -np.inf), initial=np.minimum(gbar, 0.0), config=config, label="H"
    )
    value = ValueGrid(spec, values, "H")
    return Solution(value, extract_policy(model, value, config, game), report)


def build_Hg(H: ValueGrid, model: SystemModel, slack: float = 0.0) -> ValueGrid:
    """H where H < -slack, the target reward g elsewhere.

    Interpolation leaks a little negativity into every node of a lattice
    kernel, so callers pass the membership threshold as ``slack`` to keep the
    kernel interior on the g branch.
    """
    g = model.target_reward_g(node_states(H.spec))
    return ValueGrid(H.spec, np.where(H.values < -slack, H.values, g), "H_g")


def _solve_reach(
    model: SystemModel,
    spec: GridSpec,
    reach: np.ndarray,
    config: SolverConfig,
    label: str,
    warm_start: Optional[ValueGrid] = None,
) -> Solution:
    _check_spec(model, spec)
    game = GridGame(model, spec, config)
    avoid = model.constraint_l(node_states(spec))
    initial = np.minimum(avoid, reach)
    if warm_start is not None:
        # any sub-solution may seed the increasing iteration
        initial = np.maximum(initial, warm_start.values)
    values, report = value_iteration(game, upper=avoid, lower=reach, initial=initial, config=config, label=label)
    value = ValueGrid(spec, values, label)
    return Solution(value, extract_policy(model, value, config, game), report)


def solve_V(
    model: SystemModel, spec: GridSpec, Hg: ValueGrid, config: SolverConfig, warm_start: Optional[ValueGrid] = None
) -> Solution:
    """Reach-avoid-stay value V; ``{V > 0}`` is the maximal robust RAS set."""
    if Hg.spec != spec:
        raise ValidationError("H_g lives on a different grid.", {"hg": Hg.spec.as_dict(), "grid": spec.as_dict()})
    return _solve_reach(model, spec, Hg.values, config, "V", warm_start)


def solve_V_RA(
    model: SystemModel, spec: GridSpec, config: SolverConfig, warm_start: Optional[ValueGrid] = None
) -> Solution:
    """Reach-avoid baseline: the V backup with g in place of H_g.

    Warm-starting from a converged V keeps ``V <= V_RA`` exact at every node.
    """
    g = model.target_reward_g(node_states(spec))
    return _solve_reach(model, spec, g, config, "V_RA", warm_start)


def closure_slack(config: SolverConfig, epsilon: float) -> float:
    """Interpolation slack ``kappa`` of the invariance closure check.

    At a converged H a node with ``H >= -epsilon`` has greedy successors with
    ``H >= (H - tolerance) / gamma``, so ``kappa = (epsilon + tolerance) / gamma - epsilon``.
    """
    return (epsilon + config.tolerance) / config.gamma - epsilon


def invariance_closure(
    model: SystemModel,
    H: ValueGrid,
    policy: TabularPolicy,
    config: SolverConfig,
    epsilon: Optional[float] = None,
    slack: Optional[float] = None,
) -> float:
    """Fraction of nodes in ``{H >= -epsilon}`` whose greedy step stays in ``{H >= -epsilon - slack}``.

    Every lattice disturbance is tried against the stored control of each node.
    """
    epsilon = config.epsilon(H) if epsilon is None else epsilon
    slack = closure_slack(config, epsilon) if slack is None else slack
    members = np.flatnonzero(H.values >= -epsilon)
    if members.size == 0:
        return 1.0
    states = node_states(H.spec, members)
    n_disturbances = config.n_disturbances
    successors = model.step_batch(
        np.repeat(states[:, None, :], n_disturbances, axis=1),
        np.repeat(policy.controls[members][:, None, :], n_disturbances, axis=1),
        np.broadcast_to(config.disturbance_lattice, (members.size,) + config.disturbance_lattice.shape),
    )
    worst = interpolate_many(H, successors).min(axis=1)
    return float(np.mean(worst >= -epsilon - slack))
