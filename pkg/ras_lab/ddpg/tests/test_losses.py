import numpy as np
import pytest

from ras_lab.ddpg.losses import (
    actor_update,
    critic_loss_H,
    critic_loss_V,
    h_residuals,
    mean_square,
    v_residuals,
)
from ras_lab.ddpg.mlp import MLP
from ras_lab.ddpg.tests.models import StationaryModel
from ras_lab.systems.benchmarks import CartModel
from ras_lab.utils.exceptions import ValidationError


def zero_network(widths, **kwargs) -> MLP:
    network = MLP(widths, **kwargs)
    for param in network.parameters():
        param[...] = 0.0
    return network


def velocity_critic() -> MLP:
    critic = zero_network([2, 1])
    critic.weights[0][1, 0] = 1.0
    return critic


class TestCriticLossH:
    def test_fixed_point_has_zero_loss(self):
        residuals = h_residuals(np.array([-1.0]), np.array([-1.0]), np.array([-0.5]), 0.9)
        assert mean_square(residuals) == 0.0

    def test_hand_arithmetic(self):
        # H(x) = 0, gbar(x) = -2, gamma * H(x') = -1
        residuals = h_residuals(np.array([0.0]), np.array([-2.0]), np.array([-1.0]), 1.0)
        assert residuals.tolist() == [-2.0]
        assert mean_square(residuals) == 4.0

    def test_mean_of_squares(self):
        assert mean_square(np.array([1.0, 3.0])) == 5.0

    def test_zero_critic_on_a_model(self):
        model = StationaryModel(g=-2.0)
        critic = zero_network([1, 4, 1])
        actor = MLP([1, 4, 1], output="bounded", bounds=model.control_bounds)
        loss, grads = critic_loss_H(model, np.array([[0.3]]), critic, actor, actor, gamma=0.9)
        assert loss == 4.0
        # d loss / d output = -2 * residual
        assert grads[-1].tolist() == [4.0]

    def test_rejects_an_empty_batch(self):
        model = StationaryModel()
        critic = MLP([1, 1])
        with pytest.raises(ValidationError):
            critic_loss_H(model, np.empty((0, 1)), critic, critic, critic, gamma=0.9)


class TestCriticLossV:
    def test_fixed_point_has_zero_contribution(self):
        residuals = v_residuals(np.array([-0.2]), np.array([0.5]), np.array([-1.0]), np.array([-0.2]), 1.0)
        assert mean_square(residuals) == 0.0

    def test_hand_arithmetic(self):
        residuals = v_residuals(np.array([0.0]), np.array([-0.5]), np.array([-1.0]), np.array([-0.2]), 1.0)
        assert residuals.tolist() == [-0.5]
        assert mean_square(residuals) == 0.25

    def test_equal_samples_match_a_single_sample(self):
        model = StationaryModel(g=0.5, constraint=-0.5)
        critic = MLP([1, 4, 1], seed=3)
        actor = MLP([1, 4, 1], output="bounded", bounds=model.control_bounds)
        hg = lambda states: np.full(len(states), -1.0)  # noqa E731
        single, _ = critic_loss_V(model, np.array([[0.2]]), critic, hg, actor, actor, gamma=0.9)
        batch, _ = critic_loss_V(model, np.full((5, 1), 0.2), critic, hg, actor, actor, gamma=0.9)
        assert batch == pytest.approx(single, rel=1e-12)


class TestActorUpdate:
    def test_constant_critic_gives_zero_gradients(self, cart: CartModel):
        critic = zero_network([2, 1])
        critic.biases[0][:] = 3.0
        actor_u = MLP([2, 8, 1], output="bounded", bounds=cart.control_bounds, seed=1)
        actor_d = MLP([2, 8, 1], output="bounded", bounds=cart.disturbance_bounds, seed=2)
        update = actor_update(cart, np.random.default_rng(0).normal(size=(16, 2)), critic, actor_u, actor_d)
        assert all(not np.any(grad) for grad in update.control + update.disturbance)
        assert update.objective == pytest.approx(3.0)

    def test_velocity_critic_pushes_control_up(self, cart: CartModel):
        actor_u = MLP([2, 8, 1], output="bounded", bounds=cart.control_bounds, seed=1)
        actor_d = MLP([2, 8, 1], output="bounded", bounds=cart.disturbance_bounds, seed=2)
        states = np.random.default_rng(1).normal(size=(16, 2))
        update = actor_update(cart, states, velocity_critic(), actor_u, actor_d)
        assert np.all(update.control_action_grad > 0)
        # the output bias moves the action monotonically
        assert update.control[-1][0] > 0

    def test_disturbance_moves_against_the_control(self, cart: CartModel):
        actor_u = MLP([2, 8, 1], output="bounded", bounds=cart.control_bounds, seed=1)
        states = np.random.default_rng(2).normal(size=(16, 2))
        update = actor_update(cart, states, velocity_critic(), actor_u, actor_u.copy())
        np.testing.assert_array_equal(update.disturbance_action_grad, update.control_action_grad)
        for ascent, descent in zip(update.control, update.disturbance):
            np.testing.assert_array_equal(descent, -ascent)
