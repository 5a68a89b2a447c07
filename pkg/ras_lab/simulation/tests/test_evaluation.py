import json

import numpy as np
import pytest

from ras_lab.grids.lattice import GridSpec
from ras_lab.grids.values import ValueGrid
from ras_lab.simulation.evaluation import (
    SAMPLING_BATCH,
    evaluate_success,
    sample_initial_states,
    set_area,
    write_report_json,
)
from ras_lab.simulation.policies import SwitchingPolicy
from ras_lab.simulation.rollout import TrajectoryRecord, rollout_many
from ras_lab.solvers.policies import LookaheadPolicy
from ras_lab.utils.exceptions import SamplingFailureError, ValidationError

UNIT_SQUARE = GridSpec(lower=(0.0, 0.0), upper=(1.0, 1.0), counts=(11, 11))


def record(g, avoid, policy="pi_RAS", mode="random") -> TrajectoryRecord:
    g = np.asarray(g, dtype=float)
    steps = len(g) - 1
    return TrajectoryRecord(
        states=np.zeros((steps + 1, 2)),
        controls=np.zeros((steps, 1)),
        disturbances=np.zeros((steps, 1)),
        g=g,
        l=np.asarray(avoid, dtype=float),
        hg=None,
        branches=None,
        seed=0,
        mode=mode,
        policy=policy,
    )


def enters_and_leaves() -> TrajectoryRecord:
    g = np.full(101, -1.0)
    g[10:50] = 1.0
    return record(g, np.ones(101))


class TestPredicates:
    def test_always_inside(self):
        trajectory = record(np.ones(11), np.ones(11))
        assert trajectory.safe and trajectory.reached and trajectory.stayed
        assert trajectory.stay_time == 0

    def test_constraint_violation_is_unsafe(self):
        avoid = np.ones(11)
        avoid[4] = 0.0
        trajectory = record(np.ones(11), avoid)
        assert not trajectory.safe
        assert trajectory.reached and trajectory.stayed

    def test_entering_then_leaving(self):
        trajectory = enters_and_leaves()
        assert trajectory.reached and trajectory.reach_time == 10
        assert not trajectory.stayed and trajectory.stay_time is None

    def test_stay_time_is_the_last_entry(self):
        g = np.array([-1.0, 1.0, -1.0, 1.0, 1.0])
        assert record(g, np.ones(5)).stay_time == 3


class TestEvaluateSuccess:
    def test_rates_are_exact_fractions(self):
        trajectories = [record(np.ones(11), np.ones(11)), enters_and_leaves(), record(-np.ones(11), -np.ones(11))]
        report = evaluate_success(trajectories)
        assert report.overall.total == 3
        assert report.overall.rates == {
            "safe": 2 / 3,
            "reach": 2 / 3,
            "stay": 1 / 3,
            "safe_reach": 2 / 3,
            "safe_stay": 1 / 3,
        }

    def test_breakdown_per_policy_and_mode(self):
        trajectories = [
            record(np.ones(5), np.ones(5)),
            record(np.ones(5), np.ones(5), mode="adversarial"),
            record(-np.ones(5), np.ones(5), policy="pi_RA", mode="adversarial"),
        ]
        report = evaluate_success(trajectories, meta={"seed": 3})
        assert list(report.breakdown) == ["pi_RAS/random", "pi_RAS/adversarial", "pi_RA/adversarial"]
        assert report.breakdown["pi_RA/adversarial"].reach == 0

    def test_ordering_of_rates(self):
        trajectories = [record(np.ones(5), np.ones(5)), enters_and_leaves(), record(np.ones(7), -np.ones(7))]
        rates = evaluate_success(trajectories).overall.rates
        assert rates["stay"] <= rates["reach"] <= 1
        assert rates["safe_reach"] <= rates["safe"]

    def test_rejects_an_empty_set(self):
        with pytest.raises(ValidationError):
            evaluate_success([])

    def test_report_document(self, tmp_path):
        report = evaluate_success([record(np.ones(5), np.ones(5))], meta={"config_hash": "abc", "seed": 1})
        document = json.loads(write_report_json(report, tmp_path / "report.json").read_text())
        assert document["format"] == "ras-report"
        assert document["meta"] == {"config_hash": "abc", "seed": 1}
        assert document["overall"]["counts"]["safe_stay"] == 1


class TestSampleInitialStates:
    def test_threshold_above_the_maximum(self):
        grid = ValueGrid(UNIT_SQUARE, np.zeros(UNIT_SQUARE.size))
        with pytest.raises(SamplingFailureError):
            sample_initial_states(grid, 0.5, 10)

    def test_threshold_below_the_minimum_keeps_the_first_draws(self):
        grid = ValueGrid(UNIT_SQUARE, np.zeros(UNIT_SQUARE.size))
        states = sample_initial_states(grid, -1.0, 25, seed=4)
        expected = np.random.default_rng(4).uniform(UNIT_SQUARE.low, UNIT_SQUARE.high, (SAMPLING_BATCH, 2))[:25]
        assert states.tolist() == expected.tolist()

    def test_tiny_acceptance_region_fails(self):
        spec = GridSpec(lower=(0.0, 0.0), upper=(1.0, 1.0), counts=(101, 101))
        values = -np.ones(spec.size)
        values[0] = 1.0
        with pytest.raises(SamplingFailureError):
            sample_initial_states(ValueGrid(spec, values), 0.0, 1000)

    def test_cart_samples_lie_in_the_ras_set(self, cart_solutions):
        value = cart_solutions["V"].value
        states = sample_initial_states(value, 0.0, 1000, seed=0)
        assert states.shape == (1000, 2)
        assert np.all(value(states) > 0)
        assert sample_initial_states(value, 0.0, 1000, seed=0).tobytes() == states.tobytes()

    def test_rejects_a_zero_count(self, cart_solutions):
        with pytest.raises(ValidationError):
            sample_initial_states(cart_solutions["V"].value, 0.0, 0)


class TestSetArea:
    def test_all_positive_unit_square(self):
        assert set_area(ValueGrid(UNIT_SQUARE, np.ones(UNIT_SQUARE.size)), 0.0) == pytest.approx(1.0)

    def test_all_negative(self):
        assert set_area(ValueGrid(UNIT_SQUARE, -np.ones(UNIT_SQUARE.size)), 0.0) == 0.0

    def test_ras_set_is_larger_than_the_kernel(self, cart_solutions, cart_config):
        hg, v = cart_solutions["Hg"], cart_solutions["V"].value
        kernel = set_area(hg, cart_config.epsilon(hg))
        assert set_area(v, cart_config.epsilon(v)) > kernel > 0


@pytest.mark.slow
def test_monte_carlo_success_of_the_switching_policy(cart, cart_solutions, cart_config):
    v = cart_solutions["V"].value
    starts = sample_initial_states(v, cart_config.epsilon(v), 1000, seed=0)
    ras = SwitchingPolicy(
        cart_solutions["Hg"],
        reach=LookaheadPolicy(cart, v, cart_config),
        stay=LookaheadPolicy(cart, cart_solutions["H"].value, cart_config),
    )
    ra = LookaheadPolicy(cart, cart_solutions["V_RA"].value, cart_config, label="pi_RA")
    ras_rates = evaluate_success(rollout_many(cart, ras, "random", starts, 600, master_seed=0, threads=4)).overall.rates
    ra_rates = evaluate_success(rollout_many(cart, ra, "random", starts, 600, master_seed=0, threads=4)).overall.rates
    assert ras_rates["safe_reach"] >= 0.98
    assert ras_rates["safe_stay"] >= 0.95
    assert ra_rates["safe_stay"] < ras_rates["safe_stay"]
