import numpy as np
import pytest

from ras_lab.ddpg.mlp import MLP
from ras_lab.simulation.policies import ActorPolicy, SwitchingPolicy, ras_action
from ras_lab.simulation.tests.stubs import ConstantPolicy, constant_hg
from ras_lab.systems.benchmarks import CartModel
from ras_lab.utils.exceptions import InvalidStateError


@pytest.mark.parametrize("level, expected", [(-0.4, -1.0), (0.7, 1.0), (0.0, -1.0)])
def test_ras_action_branches(level, expected):
    policy = SwitchingPolicy(constant_hg(level), reach=ConstantPolicy(-1.0), stay=ConstantPolicy(1.0))
    assert ras_action(policy, [0.5, 0.5]).tolist() == [expected]


def test_ras_action_rejects_non_finite_states():
    policy = SwitchingPolicy(constant_hg(-1.0), reach=ConstantPolicy(-1.0), stay=ConstantPolicy(1.0))
    with pytest.raises(InvalidStateError):
        ras_action(policy, [np.nan, 0.0])


def test_switching_adversary_follows_the_active_branch():
    reach, stay = ConstantPolicy(-1.0, disturbance=-2.0), ConstantPolicy(1.0, disturbance=2.0)
    assert SwitchingPolicy(constant_hg(1.0), reach, stay).adversary([0.0, 0.0]).tolist() == [2.0]
    assert SwitchingPolicy(constant_hg(-1.0), reach, stay).adversary([0.0, 0.0]).tolist() == [-2.0]


def test_grid_gated_switch(cart: CartModel, cart_solutions):
    hg = cart_solutions["Hg"]
    policy = SwitchingPolicy(hg, reach=ConstantPolicy(-1.0), stay=ConstantPolicy(1.0))
    assert policy.branch([0.0, 0.0]) == "stay"
    assert policy.branch([4.5, 0.0]) == "reach"


def test_actor_policy_stays_in_bounds(cart: CartModel):
    actor_u = MLP([2, 8, 1], output="bounded", bounds=cart.control_bounds, seed=1)
    actor_d = MLP([2, 8, 1], output="bounded", bounds=cart.disturbance_bounds, seed=2)
    actor_u.weights[-1][:] *= 1e4
    policy = ActorPolicy(actor_u, actor_d)
    for state in np.random.default_rng(0).normal(scale=100.0, size=(20, 2)):
        assert cart.control_bounds.contains(policy.control(state))
        assert cart.disturbance_bounds.contains(policy.adversary(state))
