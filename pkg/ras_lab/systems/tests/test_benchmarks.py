import numpy as np
import pytest

from ras_lab.systems.benchmarks import (
    BenchmarkId,
    Box,
    CartModel,
    ChaseModel,
    ChaseParams,
    build_model,
    constraint_l,
    gbar,
    step,
    target_reward_g,
)
from ras_lab.utils.exceptions import InputDomainError, InvalidStateError, ValidationError


class TestStep:
    def test_cart_euler_update(self, cart: CartModel):
        np.testing.assert_allclose(step(cart, [4.0, -2.0], [-3.0], [2.0]), [3.79, -2.1], atol=1e-12)

    @pytest.mark.parametrize("dt", [0.01, 0.1, 0.5])
    def test_cart_origin_is_stationary(self, dt):
        model = CartModel(dt=dt)
        assert step(model, [0.0, 0.0], [0.0], [0.0]).tolist() == [0.0, 0.0]

    def test_chase_at_rest(self, chase: ChaseModel):
        assert step(chase, [1.0, 0.0, 0.0, 0.0], [0.0, 0.0], [0.0, 0.0]).tolist() == [1.0, 0.0, 0.0, 0.0]

    def test_chase_relative_acceleration(self, chase: ChaseModel):
        np.testing.assert_allclose(
            step(chase, [0.0, 0.0, 1.0, 0.0], [1.0, 0.0], [0.5, 0.5]), [0.1, 0.0, 1.05, -0.05], atol=1e-12
        )

    def test_rejects_control_out_of_bounds(self, cart: CartModel):
        with pytest.raises(InputDomainError):
            step(cart, [0.0, 0.0], [3.5], [0.0])

    def test_rejects_disturbance_out_of_bounds(self, cart: CartModel):
        with pytest.raises(InputDomainError):
            step(cart, [0.0, 0.0], [0.0], [-2.1])

    @pytest.mark.parametrize("state", [[np.nan, 0.0], [0.0, np.inf], [0.0]])
    def test_rejects_invalid_states(self, cart: CartModel, state):
        with pytest.raises(InvalidStateError):
            step(cart, state, [0.0], [0.0])

    def test_is_bit_reproducible(self, cart: CartModel):
        rng = np.random.default_rng(3)
        for _ in range(20):
            x = rng.uniform(-6, 6, 2)
            u, d = rng.uniform(-3, 3, 1), rng.uniform(-2, 2, 1)
            assert step(cart, x, u, d).tobytes() == step(cart, x.copy(), u.copy(), d.copy()).tobytes()

    def test_batch_matches_single_steps(self, chase: ChaseModel):
        rng = np.random.default_rng(1)
        states = rng.uniform(-1, 1, (5, 4))
        controls = rng.uniform(-1, 1, (5, 2))
        disturbances = rng.uniform(-0.5, 0.5, (5, 2))
        batch = chase.step_batch(states, controls, disturbances)
        for row in range(5):
            np.testing.assert_array_equal(batch[row], step(chase, states[row], controls[row], disturbances[row]))


class TestRewards:
    @pytest.mark.parametrize(
        "state, expected",
        [([0.0, 0.0], 1.0), ([1.0, 5.0], 0.0)],
    )
    def test_cart_target_reward(self, cart: CartModel, state, expected):
        assert target_reward_g(cart, state) == expected

    @pytest.mark.parametrize(
        "state, expected",
        [([-3.0, 0.0], -1.0), ([-2.0, -4.0], 0.0)],
    )
    def test_cart_constraint(self, cart: CartModel, state, expected):
        assert constraint_l(cart, state) == expected

    @pytest.mark.parametrize(
        "state, expected",
        [([0.0, 0.0], 1.0), ([-3.0, 0.0], -2.0), ([-2.0, 0.0], -1.0)],
    )
    def test_cart_gbar(self, cart: CartModel, state, expected):
        assert gbar(cart, state) == expected

    def test_chase_boundaries(self, chase: ChaseModel):
        params = chase.params
        on_target = [params.target_radius * np.cos(0.3), params.target_radius * np.sin(0.3), 0.4, -0.2]
        on_obstacle = [0.0, params.obstacle_radius, 0.0, 0.0]
        assert target_reward_g(chase, on_target) == pytest.approx(0.0, abs=1e-12)
        assert constraint_l(chase, on_obstacle) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("model_class, width", [(CartModel, 6.0), (ChaseModel, 2.0)])
    def test_gbar_is_below_both_rewards(self, model_class, width):
        model = model_class()
        states = np.random.default_rng(7).uniform(-width, width, (500, model.state_dim))
        values = model.gbar(states)
        assert np.all(values <= model.target_reward_g(states))
        assert np.all(values <= model.constraint_l(states))

    def test_signs_match_cart_geometry(self, cart: CartModel):
        states = np.random.default_rng(11).uniform(-6, 6, (1000, 2))
        position = states[:, 0]
        np.testing.assert_array_equal(cart.target_reward_g(states) > 0, np.abs(position) < 1.0)
        np.testing.assert_array_equal(cart.constraint_l(states) <= 0, np.abs(position + 3.0) <= 1.0)

    def test_signs_match_chase_geometry(self, chase: ChaseModel):
        states = np.random.default_rng(13).uniform(-2, 2, (1000, 4))
        distance = np.hypot(states[:, 0], states[:, 1])
        np.testing.assert_array_equal(chase.target_reward_g(states) > 0, distance < chase.params.target_radius)
        np.testing.assert_array_equal(chase.constraint_l(states) <= 0, distance <= chase.params.obstacle_radius)


class TestJacobians:
    @pytest.mark.parametrize("model_class", [CartModel, ChaseModel])
    def test_match_finite_differences(self, model_class):
        model = model_class()
        x = np.full(model.state_dim, 0.3)
        u = np.full(model.control_dim, 0.2)
        d = np.full(model.disturbance_dim, 0.1)
        h = 1e-6
        for column in range(model.control_dim):
            bump = np.zeros(model.control_dim)
            bump[column] = h
            numeric = (model.step_batch(x, u + bump, d) - model.step_batch(x, u - bump, d)) / (2 * h)
            np.testing.assert_allclose(numeric, model.control_jacobian()[:, column], atol=1e-8)
        for column in range(model.disturbance_dim):
            bump = np.zeros(model.disturbance_dim)
            bump[column] = h
            numeric = (model.step_batch(x, u, d + bump) - model.step_batch(x, u, d - bump)) / (2 * h)
            np.testing.assert_allclose(numeric, model.disturbance_jacobian()[:, column], atol=1e-8)


class TestBuildModel:
    def test_by_string_id(self):
        model = build_model("chase4d", dt=0.05, params={"obstacle_radius": 0.3})
        assert model.benchmark_id is BenchmarkId.CHASE4D
        assert model.dt == 0.05
        assert model.params.obstacle_radius == 0.3

    def test_unknown_benchmark(self):
        with pytest.raises(ValidationError) as error:
            build_model("vtol18d")
        assert error.value.details["choices"] == ["cart2d", "chase4d"]

    def test_unknown_parameter(self):
        with pytest.raises(ValidationError):
            build_model("cart2d", params={"mass": 2.0})

    def test_rejects_non_positive_dt(self):
        with pytest.raises(ValidationError):
            CartModel(dt=0.0)

    @pytest.mark.parametrize(
        "params",
        [
            {"obstacle_radius": 1.2, "target_radius": 1.0},
            {"control_bound": 0.5, "disturbance_bound": 0.5},
        ],
    )
    def test_chase_parameter_invariants(self, params):
        with pytest.raises(ValidationError):
            ChaseParams(**params)

    def test_empty_box(self):
        with pytest.raises(ValidationError):
            Box(lower=(1.0,), upper=(0.0,))
