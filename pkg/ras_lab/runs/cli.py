"""Subcommands of the ``ras`` command line.

Each subcommand reads the run configuration, loads the artifacts it depends
on, writes its own artifacts and returns an :class:`Outcome` with a JSON
summary and a one-line report.
"""
import argparse
import dataclasses
import json
import logging
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from django.conf import settings

from ras_lab.ddpg.training import Reference, load_checkpoint, save_checkpoint, train_two_step, write_loss_csv
from ras_lab.grids.io import write_grid_json
from ras_lab.grids.values import sign_agreement, sup_gap
from ras_lab.runs.artifacts import ArtifactStore
from ras_lab.runs.config import RunConfig
from ras_lab.runs.rendering import SliceSpec, render_heatmap
from ras_lab.simulation.evaluation import evaluate_success, sample_initial_states, set_area, write_report_json
from ras_lab.simulation.policies import STAY, ActorPolicy, SwitchingPolicy
from ras_lab.simulation.rollout import (
    TrajectoryRecord,
    read_trajectory_jsonl,
    rollout,
    rollout_many,
    trajectory_seed,
    write_trajectory_jsonl,
)
from ras_lab.solvers.policies import LookaheadPolicy
from ras_lab.solvers.qlearning import q_learning_H, q_learning_V
from ras_lab.solvers.tabular import build_Hg, invariance_closure, solve_H, solve_V, solve_V_RA
from ras_lab.systems.benchmarks import BenchmarkId
from ras_lab.utils.exceptions import ConfigError, ContractViolationError, RasLabError

logger = logging.getLogger(__name__)

SUBCOMMANDS = (
    "solve-h",
    "build-hg",
    "solve-v",
    "solve-ra",
    "qlearn",
    "train-ddpg",
    "simulate",
    "evaluate",
    "render",
    "export",
)

# Start of the single ``simulate`` trajectory when the configuration names none.
DEFAULT_STARTS = {
    BenchmarkId.CART2D: (4.5, 0.0),
    BenchmarkId.CHASE4D: (1.6, 0.0, 0.0, 0.0),
}


@dataclass
class Outcome:
    summary: Dict[str, Any]
    line: str


class Pipeline:
    """The subcommands of one run configuration over one output directory."""

    def __init__(self, config: RunConfig, threads: Optional[int] = None, output_dir: Optional[Path] = None):
        self.config = config
        self.threads = threads or getattr(settings, "RAS_THREADS", 0) or config.solver.threads
        self.store = ArtifactStore(config, output_dir)
        self.model = config.model()
        self.solver = config.solver_config(self.threads)
        self.spec = config.grid

    def solve_h(self) -> Outcome:
        solution = solve_H(self.model, self.spec, self.solver)
        report = solution.report
        self.store.write_grid("h", solution.value, sweeps=report.sweeps, final_residual=report.final_residual)
        self.store.write_policy("policy_h", solution.policy)
        epsilon = self.solver.epsilon(solution.value)
        summary = {
            **report.describe(),
            "tolerance": self.solver.tolerance,
            "epsilon": epsilon,
            "kernel_nodes": int(np.sum(solution.value.values >= -epsilon)),
            "closure": invariance_closure(self.model, solution.value, solution.policy, self.solver, epsilon),
        }
        line = (
            f"solve-h: {report.sweeps} sweeps, residual {report.final_residual:.3e} <= {self.solver.tolerance:.1e}, "
            f"{summary['kernel_nodes']} kernel nodes"
        )
        return Outcome(summary, line)

    def build_hg(self) -> Outcome:
        H = self.store.read_grid("h")
        epsilon = self.solver.epsilon(H)
        hg = build_Hg(H, self.model, slack=epsilon)
        self.store.write_grid("hg", hg, slack=epsilon)
        positive = int(np.sum(hg.values > self.solver.epsilon(hg)))
        return Outcome({"slack": epsilon, "positive_nodes": positive}, f"build-hg: {positive} nodes above epsilon")

    def _solve_reach(self, name: str, solution) -> Outcome:
        report = solution.report
        self.store.write_grid(name, solution.value, sweeps=report.sweeps, final_residual=report.final_residual)
        self.store.write_policy(f"policy_{name}", solution.policy)
        epsilon = self.solver.epsilon(solution.value)
        members = int(np.sum(solution.value.values > epsilon))
        summary = {**report.describe(), "tolerance": self.solver.tolerance, "epsilon": epsilon, "members": members}
        subcommand = "solve-v" if name == "v" else "solve-ra"
        line = (
            f"{subcommand}: {report.sweeps} sweeps, residual {report.final_residual:.3e} <= "
            f"{self.solver.tolerance:.1e}, {members} nodes above epsilon"
        )
        return Outcome(summary, line)

    def solve_v(self) -> Outcome:
        hg = self.store.read_grid("hg")
        return self._solve_reach("v", solve_V(self.model, self.spec, hg, self.solver))

    def solve_ra(self) -> Outcome:
        warm_start = self.store.read_grid("v") if self.store.exists("v") else None
        return self._solve_reach("v_ra", solve_V_RA(self.model, self.spec, self.solver, warm_start=warm_start))

    def qlearn(self) -> Outcome:
        h_q = q_learning_H(self.model, self.spec, self.config.qlearn, self.solver)
        self.store.write_grid("h_q", h_q)
        summary: Dict[str, Any] = {"updates": self.config.qlearn.total_updates}
        if self.store.exists("h"):
            H = self.store.read_grid("h")
            summary["h"] = {
                "sign_agreement": sign_agreement(H.values, h_q.values, -self.solver.epsilon(H)),
                "sup_gap": sup_gap(H.values, h_q.values),
            }
        if self.store.exists("hg"):
            v_q = q_learning_V(self.model, self.spec, self.store.read_grid("hg"), self.config.qlearn, self.solver)
            self.store.write_grid("v_q", v_q)
            if self.store.exists("v"):
                V = self.store.read_grid("v")
                summary["v"] = {
                    "sign_agreement": sign_agreement(V.values, v_q.values),
                    "sup_gap": sup_gap(V.values, v_q.values),
                }
        line = f"qlearn: {summary['updates']} updates"
        if "h" in summary:
            line += f", H sign agreement {summary['h']['sign_agreement']:.4f}, sup gap {summary['h']['sup_gap']:.3e}"
        return Outcome(summary, line)

    def train_ddpg(self) -> Outcome:
        ddpg = self.config.ddpg
        references = {}
        for name in ("h", "v"):
            if self.store.exists(name):
                grid = self.store.read_grid(name)
                threshold = -self.solver.epsilon(grid) if name == "h" else 0.0
                references[name] = Reference.from_grid(grid, ddpg.eval_samples, seed=ddpg.seed, threshold=threshold)
        result = train_two_step(
            self.model, ddpg, self.spec.box(), h_reference=references.get("h"), v_reference=references.get("v")
        )
        save_checkpoint(result, ddpg, self.store.path("ddpg"), meta=self.store.stamp())
        write_loss_csv(result.history, self.store.path("ddpg_losses"))
        last = {snapshot.stage: snapshot for snapshot in result.history}
        summary = {
            stage: {"iteration": snapshot.iteration, "sign_agreement": snapshot.sign_agreement}
            for stage, snapshot in last.items()
        }
        parts = [
            f"{stage} {snapshot.iteration} steps"
            + ("" if snapshot.sign_agreement is None else f" (agreement {snapshot.sign_agreement:.3f})")
            for stage, snapshot in last.items()
        ]
        return Outcome(summary, "train-ddpg: " + ", ".join(parts))

    def _greedy(self, name: str, label: str):
        if self.config.evaluation.policy_lookup == "nearest":
            return dataclasses.replace(self.store.read_policy(f"policy_{name}"), label=label)
        return LookaheadPolicy(self.model, self.store.read_grid(name), self.solver, label=label)

    def policy(self, name: str):
        """Closed-loop policy by evaluation name: ``ras``, ``ra`` or ``neural``."""
        if name == "ras":
            hg = self.store.read_grid("hg")
            return SwitchingPolicy(hg, self._greedy("v", "pi_V"), self._greedy("h", "pi_H"), label="ras")
        if name == "ra":
            return self._greedy("v_ra", "ra")
        result, _ = load_checkpoint(self.store.require("ddpg"), self.model)
        return SwitchingPolicy(
            result.hg,
            ActorPolicy(result.v.actor_u, result.v.actor_d, "pi_V_nn"),
            ActorPolicy(result.h.actor_u, result.h.actor_d, "pi_H_nn"),
            label="neural",
        )

    def simulate(self) -> Outcome:
        evaluation = self.config.evaluation
        x0 = evaluation.initial_state or DEFAULT_STARTS[BenchmarkId(self.config.benchmark.id)]
        seed = trajectory_seed(self.config.seed, 0)
        summary: Dict[str, Any] = {"initial_state": list(x0), "seed": seed}
        parts = []
        for name in evaluation.policies:
            policy = self.policy(name)
            for mode in evaluation.modes:
                record = rollout(self.model, policy, mode, x0, evaluation.horizon, seed)
                write_trajectory_jsonl(record, self.store.simulation_path(name, mode), meta=self.store.stamp())
                summary[f"{name}/{mode}"] = describe_trajectory(record)
                parts.append(
                    f"{name}/{mode} safe={record.safe} reach_time={record.reach_time} stay_time={record.stay_time}"
                )
        return Outcome(summary, "simulate: " + "; ".join(parts))

    def evaluate(self) -> Outcome:
        evaluation = self.config.evaluation
        V = self.store.read_grid("v")
        threshold = evaluation.threshold_fraction * V.value_range
        starts = sample_initial_states(V, threshold, evaluation.count, seed=self.config.seed)
        records: List[TrajectoryRecord] = []
        for name in evaluation.policies:
            policy = self.policy(name)
            for mode in evaluation.modes:
                batch = rollout_many(
                    self.model, policy, mode, starts, evaluation.horizon, self.config.seed, threads=self.threads
                )
                for index, record in enumerate(batch[: evaluation.saved_trajectories]):
                    write_trajectory_jsonl(record, self.store.trajectory_path(name, mode, index), self.store.stamp())
                records.extend(batch)
        report = evaluate_success(records, meta=self.store.stamp(threshold=threshold, count=evaluation.count))
        write_report_json(report, self.store.path("report"))
        summary = {key: counts.rates for key, counts in report.breakdown.items()}
        parts = [
            f"{key} reach {rates['safe_reach']:.3f} stay {rates['safe_stay']:.3f}" for key, rates in summary.items()
        ]
        return Outcome(summary, "evaluate: " + "; ".join(parts))

    def render(self) -> Outcome:
        render = self.config.render
        slice_spec = SliceSpec(render.axes, render.fixed)
        paths = self.store.simulation_paths() + self.store.trajectory_paths()
        trajectories = [read_trajectory_jsonl(path)[0] for path in paths[: render.trajectories]]
        summary = {}
        for name in render.grids:
            figure = render_heatmap(
                self.store.read_grid(name),
                slice_spec,
                self.store.figure_path(name, "svg"),
                regions=self.model.regions(),
                trajectories=trajectories,
                meta=self.store.stamp(grid=name),
                scale=render.scale,
            )
            summary[name] = {"contour_segments": len(figure.contour), "svg": figure.svg.name, "pgm": figure.pgm.name}
        return Outcome(summary, f"render: {len(summary)} figures with {len(trajectories)} trajectories")

    def export(self) -> Outcome:
        """Set areas of AS, RAS and RA, and every grid as a JSON document."""
        areas, epsilons = {}, {}
        for key, name in (("AS", "hg"), ("RAS", "v"), ("RA", "v_ra")):
            if key == "RA" and not self.store.exists(name):
                continue
            grid = self.store.read_grid(name)
            epsilons[key] = self.solver.epsilon(grid)
            areas[key] = set_area(grid, epsilons[key])
        if not areas["RAS"] > areas["AS"] > 0:
            raise ContractViolationError("Set areas must satisfy RAS > AS > 0.", {"areas": areas})
        self.store.write_json("areas", {"areas": areas, "epsilon": epsilons})
        exported = []
        for name in ("h", "hg", "v", "v_ra", "h_q", "v_q"):
            if self.store.exists(name):
                write_grid_json(
                    self.store.read_grid(name), self.store.export_path(name), meta=self.store.stamp()
                )
                exported.append(name)
        line = "export: " + ", ".join(f"area({key}) {area:.4f}" for key, area in areas.items())
        return Outcome({"areas": areas, "epsilon": epsilons, "grids": exported}, line)


def describe_trajectory(record: TrajectoryRecord) -> Dict[str, Any]:
    summary: Dict[str, Any] = {
        "safe": record.safe,
        "reached": record.reached,
        "stayed": record.stayed,
        "reach_time": record.reach_time,
        "stay_time": record.stay_time,
        "min_l": float(record.l.min()),
    }
    if record.branches is not None and STAY in record.branches:
        switch = record.branches.index(STAY)
        summary["switch_step"] = switch
        summary["switch_state"] = record.states[switch].tolist()
        summary["hg_before_switch"] = float(record.hg[switch - 1]) if switch else None
    return summary


HANDLERS: Dict[str, Callable[[Pipeline], Outcome]] = {
    "solve-h": Pipeline.solve_h,
    "build-hg": Pipeline.build_hg,
    "solve-v": Pipeline.solve_v,
    "solve-ra": Pipeline.solve_ra,
    "qlearn": Pipeline.qlearn,
    "train-ddpg": Pipeline.train_ddpg,
    "simulate": Pipeline.simulate,
    "evaluate": Pipeline.evaluate,
    "render": Pipeline.render,
    "export": Pipeline.export,
}


def _ledger_entry(subcommand: str, pipeline: Pipeline):
    if not getattr(settings, "RAS_RECORD_RUNS", False):
        return None
    from ras_lab.runs.models import SolveRun

    config = pipeline.config
    return SolveRun.objects.create(
        subcommand=subcommand,
        benchmark=config.benchmark.id,
        config_hash=config.config_hash,
        seed=config.seed,
        output_dir=str(pipeline.store.root),
    )


def run_subcommand(
    subcommand: str, config: RunConfig, threads: Optional[int] = None, output_dir: Optional[Path] = None
) -> Outcome:
    """Run one subcommand, then merge its summary into ``meta.json`` and the run ledger."""
    pipeline = Pipeline(config, threads, output_dir)
    entry = _ledger_entry(subcommand, pipeline)
    logger.info("Running %s for %s (config %s).", subcommand, config.benchmark.id, config.config_hash[:12])
    started = time.perf_counter()
    try:
        outcome = HANDLERS[subcommand](pipeline)
    except RasLabError as error:
        logger.error("%s failed: %s", subcommand, error.message)
        if entry is not None:
            entry.fail(json.loads(json.dumps(error.as_dict(), default=str)), time.perf_counter() - started)
        raise
    pipeline.store.record(subcommand, outcome.summary)
    if entry is not None:
        entry.finish(json.loads(json.dumps(outcome.summary)), time.perf_counter() - started)
    return outcome


def add_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", "-c", help="YAML run configuration; benchmark defaults when omitted.")
    parser.add_argument("--threads", type=int, help="Worker threads for sweeps and rollouts.")
    parser.add_argument("--output-dir", "-o", help="Artifact directory.")


def load_config(path: Optional[str]) -> RunConfig:
    return RunConfig.load(path) if path else RunConfig.from_dict({})


class ArgumentParser(argparse.ArgumentParser):
    """Reports usage errors as :class:`ConfigError` instead of exiting."""

    def error(self, message: str):
        raise ConfigError(f"Invalid arguments: {message}", {"usage": self.format_usage().strip()})


def cli_dispatch(argv: Sequence[str]) -> int:
    """Run one subcommand; 0 on success, the error's exit code otherwise."""
    parser = ArgumentParser(prog="ras")
    add_arguments(parser)
    try:
        options = parser.parse_args(list(argv))
        outcome = run_subcommand(
            options.subcommand, load_config(options.config), options.threads, options.output_dir
        )
    except RasLabError as error:
        sys.stderr.write(json.dumps(error.as_dict(), sort_keys=True, default=str) + "\n")
        return error.exit_code
    sys.stdout.write(outcome.line + "\n")
    return 0
