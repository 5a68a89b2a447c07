"""Critic losses and actor gradients of the two-step actor-critic scheme.

Critic targets are treated as constants. They read the successor
``f(x, pi_u(x), pi_d(x))`` through whichever networks the caller passes as
targets, normally the slowly updated copies.
"""
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from ras_lab.ddpg.mlp import MLP, ForwardCache
from ras_lab.systems.benchmarks import SystemModel
from ras_lab.utils.exceptions import ValidationError

Evaluator = Callable[[np.ndarray], np.ndarray]


def h_residuals(values: np.ndarray, gbar: np.ndarray, next_values: np.ndarray, gamma: float) -> np.ndarray:
    """``-H(x) + min(gbar(x), gamma * H(x'))`` per sample."""
    return -values + np.minimum(gbar, gamma * next_values)


def v_residuals(
    values: np.ndarray, avoid: np.ndarray, reach: np.ndarray, next_values: np.ndarray, gamma: float
) -> np.ndarray:
    """``-V(x) + min(l(x), max(H_g(x), gamma * V(x')))`` per sample."""
    return -values + np.minimum(avoid, np.maximum(reach, gamma * next_values))


def mean_square(residuals: np.ndarray) -> float:
    residuals = np.asarray(residuals, dtype=float)
    if residuals.size == 0:
        raise ValidationError("Loss of an empty batch.")
    return float(np.mean(residuals ** 2))


def _check_batch(states: np.ndarray) -> np.ndarray:
    states = np.atleast_2d(np.asarray(states, dtype=float))
    if len(states) == 0:
        raise ValidationError("Loss of an empty batch.")
    return states


def _successors(model: SystemModel, states: np.ndarray, actor_u: MLP, actor_d: MLP) -> np.ndarray:
    return model.step_batch(states, actor_u(states), actor_d(states))


def _critic_gradient(critic: MLP, cache: ForwardCache, residuals: np.ndarray) -> Tuple[float, List[np.ndarray]]:
    grads, _ = critic.backward(cache, (-2.0 * residuals / len(residuals))[:, None])
    return mean_square(residuals), grads


def critic_loss_H(
    model: SystemModel,
    states: np.ndarray,
    critic: MLP,
    actor_u: MLP,
    actor_d: MLP,
    gamma: float,
    target_critic: Optional[MLP] = None,
) -> Tuple[float, List[np.ndarray]]:
    """Mean squared H residual and its gradient w.r.t. the critic parameters."""
    states = _check_batch(states)
    successors = _successors(model, states, actor_u, actor_d)
    next_values = (target_critic or critic)(successors)[:, 0]
    values, cache = critic.forward(states)
    residuals = h_residuals(values[:, 0], model.gbar(states), next_values, gamma)
    return _critic_gradient(critic, cache, residuals)


def critic_loss_V(
    model: SystemModel,
    states: np.ndarray,
    critic: MLP,
    hg: Evaluator,
    actor_u: MLP,
    actor_d: MLP,
    gamma: float,
    target_critic: Optional[MLP] = None,
) -> Tuple[float, List[np.ndarray]]:
    """Mean squared V residual against a frozen H_g evaluator."""
    states = _check_batch(states)
    successors = _successors(model, states, actor_u, actor_d)
    next_values = (target_critic or critic)(successors)[:, 0]
    values, cache = critic.forward(states)
    residuals = v_residuals(values[:, 0], model.constraint_l(states), hg(states), next_values, gamma)
    return _critic_gradient(critic, cache, residuals)


@dataclass
class ActorGradients:
    """Update directions: ascent for the control actor, descent for the disturbance actor."""

    control: List[np.ndarray]
    disturbance: List[np.ndarray]
    #: Mean critic value at the successors (the actor objective).
    objective: float
    #: Objective gradient w.r.t. each sampled action.
    control_action_grad: np.ndarray
    disturbance_action_grad: np.ndarray


def actor_update(model: SystemModel, states: np.ndarray, critic: MLP, actor_u: MLP, actor_d: MLP) -> ActorGradients:
    """Gradients of ``mean critic(f(x, pi_u(x), pi_d(x)))`` through the dynamics.

    Both benchmarks are affine in the inputs, so the chain rule goes through
    the constant input Jacobians of the model.
    """
    states = _check_batch(states)
    controls, control_cache = actor_u.forward(states)
    disturbances, disturbance_cache = actor_d.forward(states)
    successors = model.step_batch(states, controls, disturbances)
    values, critic_cache = critic.forward(successors)
    _, state_grad = critic.backward(critic_cache, np.full_like(values, 1.0 / len(states)))
    control_grad = state_grad @ model.control_jacobian()
    disturbance_grad = state_grad @ model.disturbance_jacobian()
    ascent, _ = actor_u.backward(control_cache, control_grad)
    descent, _ = actor_d.backward(disturbance_cache, disturbance_grad)
    return ActorGradients(
        control=ascent,
        disturbance=[-grad for grad in descent],
        objective=float(values.mean()),
        control_action_grad=control_grad,
        disturbance_action_grad=disturbance_grad,
    )


actor_update_H = actor_update
actor_update_V = actor_update
