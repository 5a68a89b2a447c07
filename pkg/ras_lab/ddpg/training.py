"""Two-step actor-critic training of the H and V value functions.

Stage one trains the H critic with a control actor (ascent) and a disturbance
actor (descent). The trained critic is frozen and spliced with g into an H_g
evaluator, and stage two trains the V critic and a fresh pair of actors
against it.
"""
import csv
import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from ras_lab.ddpg.losses import actor_update, critic_loss_H, critic_loss_V
from ras_lab.ddpg.mlp import MLP, Adam, mlp_gradient_check
from ras_lab.ddpg.replay import ReplayBuffer
from ras_lab.grids.io import PathLike, reads_artifact
from ras_lab.grids.lattice import node_states
from ras_lab.grids.values import ValueGrid, sign_agreement
from ras_lab.systems.benchmarks import Box, SystemModel
from ras_lab.utils.exceptions import ArtifactError, TrainingFailureError, ValidationError

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "ras-ddpg"
CHECKPOINT_FORMAT_VERSION = 1


@dataclass(frozen=True)
class DDPGConfig:
    #: Run configurations default it to the tabular solver's discount.
    gamma: float = 0.999
    #: Samples per gradient step.
    batch_size: int = 256
    critic_rate: float = 1e-3
    actor_rate: float = 1e-4
    #: Soft target update rate.
    tau: float = 0.005
    #: Exploration noise, as a fraction of each input's bound width; decays linearly to zero.
    noise_scale: float = 0.1
    hidden: Tuple[int, ...] = (64, 64, 64)
    #: Gradient steps per stage.
    iterations: int = 20000
    eval_every: int = 500
    #: Evaluations without sign-agreement improvement before a stage stops.
    patience: int = 6
    plateau_delta: float = 0.002
    loss_ceiling: float = 1e6
    buffer_capacity: int = 100000
    parallel_envs: int = 32
    horizon: int = 100
    #: Transitions collected before the first gradient step.
    warmup: int = 1000
    eval_samples: int = 2000
    #: Random states at which each network's backpropagation is checked before its stage trains.
    gradient_points: int = 100
    gradient_tolerance: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(width) for width in self.hidden))
        if not 0 < self.gamma < 1:
            raise ValidationError("gamma must lie in (0, 1).", {"gamma": self.gamma})
        if not 0 < self.tau <= 1:
            raise ValidationError("tau must lie in (0, 1].", {"tau": self.tau})
        positive = ("batch_size", "iterations", "eval_every", "patience", "buffer_capacity", "parallel_envs", "horizon")
        bad = {name: getattr(self, name) for name in positive if getattr(self, name) < 1}
        if bad:
            raise ValidationError("DDPG settings must be positive.", bad)
        if self.gradient_points < 0 or self.gradient_tolerance <= 0:
            raise ValidationError(
                "gradient_points must be non-negative and gradient_tolerance positive.",
                {"gradient_points": self.gradient_points, "gradient_tolerance": self.gradient_tolerance},
            )
        if self.critic_rate <= 0 or self.actor_rate <= 0 or self.noise_scale < 0:
            raise ValidationError(
                "Learning rates must be positive and the noise scale non-negative.",
                {"critic_rate": self.critic_rate, "actor_rate": self.actor_rate, "noise_scale": self.noise_scale},
            )

    def as_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["hidden"] = list(self.hidden)
        return data

    @classmethod
    def field_names(cls) -> List[str]:
        return [f.name for f in fields(cls)]


@dataclass
class AgentNetworks:
    critic: MLP
    actor_u: MLP
    actor_d: MLP

    def copy(self) -> "AgentNetworks":
        return AgentNetworks(self.critic.copy(), self.actor_u.copy(), self.actor_d.copy())

    def soft_update(self, source: "AgentNetworks", tau: float):
        self.critic.soft_update(source.critic, tau)
        self.actor_u.soft_update(source.actor_u, tau)
        self.actor_d.soft_update(source.actor_d, tau)

    def is_finite(self) -> bool:
        return self.critic.is_finite() and self.actor_u.is_finite() and self.actor_d.is_finite()


class CriticValue:
    """Scalar critic as a batched state evaluator."""

    def __init__(self, critic: MLP):
        self.critic = critic

    def __call__(self, states: np.ndarray) -> np.ndarray:
        states = np.asarray(states, dtype=float)
        return self.critic(states.reshape(-1, states.shape[-1]))[:, 0].reshape(states.shape[:-1])


class NeuralHg(CriticValue):
    """Frozen H critic where it is negative, the target reward g elsewhere."""

    def __init__(self, critic: MLP, model: SystemModel):
        super().__init__(critic)
        self.model = model

    def __call__(self, states: np.ndarray) -> np.ndarray:
        values = super().__call__(states)
        return np.where(values < 0, values, self.model.target_reward_g(states))


@dataclass
class Reference:
    """Held-out tabular values the critic's signs are compared against."""

    states: np.ndarray
    values: np.ndarray
    threshold: float = 0.0

    @classmethod
    def from_grid(cls, grid: ValueGrid, samples: int, seed: int, threshold: float = 0.0) -> "Reference":
        rng = np.random.default_rng(seed)
        nodes = np.sort(rng.choice(grid.spec.size, size=min(samples, grid.spec.size), replace=False))
        return cls(node_states(grid.spec, nodes), grid.values[nodes], threshold)

    def agreement(self, evaluator: Callable[[np.ndarray], np.ndarray]) -> float:
        return sign_agreement(self.values, evaluator(self.states), self.threshold)


@dataclass
class Snapshot:
    stage: str
    iteration: int
    critic_loss: float
    actor_objective: float
    noise: float
    sign_agreement: Optional[float] = None


@dataclass
class TwoStepResult:
    h: AgentNetworks
    hg: NeuralHg
    v: AgentNetworks
    history: List[Snapshot] = field(default_factory=list)


def _network_seeds(seed: int, count: int) -> List[int]:
    return [int(value) for value in np.random.SeedSequence(seed).generate_state(count)]


def build_networks(model: SystemModel, domain: Box, config: DDPGConfig, seed: int) -> AgentNetworks:
    center = (domain.low + domain.high) / 2.0
    scale = domain.width / 2.0
    n = model.state_dim
    critic_seed, control_seed, disturbance_seed = _network_seeds(seed, 3)
    hidden = list(config.hidden)
    return AgentNetworks(
        critic=MLP([n] + hidden + [1], input_center=center, input_scale=scale, seed=critic_seed),
        actor_u=MLP(
            [n] + hidden + [model.control_dim],
            output="bounded",
            bounds=model.control_bounds,
            input_center=center,
            input_scale=scale,
            seed=control_seed,
        ),
        actor_d=MLP(
            [n] + hidden + [model.disturbance_dim],
            output="bounded",
            bounds=model.disturbance_bounds,
            input_center=center,
            input_scale=scale,
            seed=disturbance_seed,
        ),
    )


def check_gradients(stage: str, agents: AgentNetworks, domain: Box, config: DDPGConfig, seed: int):
    """Compare backpropagated and central-difference gradients of the three networks.

    Raises :class:`TrainingFailureError` when any relative error exceeds
    ``config.gradient_tolerance``.
    """
    if config.gradient_points == 0:
        return
    rng = np.random.default_rng([seed, config.gradient_points])
    points = rng.uniform(domain.low, domain.high, (config.gradient_points, domain.ndim))
    errors = {}
    for name, network in (("critic", agents.critic), ("actor_u", agents.actor_u), ("actor_d", agents.actor_d)):
        errors[name] = mlp_gradient_check(network, points, seed=seed)
        if errors[name] > config.gradient_tolerance:
            raise TrainingFailureError(
                f"Stage {stage} {name} gradients disagree with finite differences.",
                {
                    "stage": stage,
                    "network": name,
                    "relative_error": errors[name],
                    "tolerance": config.gradient_tolerance,
                },
            )
    logger.info(
        "%s gradient check passed at %d states (worst relative error %.2e).", stage, len(points), max(errors.values())
    )


class _Environments:
    """Parallel closed-loop episodes restarted uniformly inside the domain."""

    def __init__(self, model: SystemModel, domain: Box, config: DDPGConfig, rng: np.random.Generator):
        self.model = model
        self.domain = domain
        self.horizon = config.horizon
        self.rng = rng
        self.states = rng.uniform(domain.low, domain.high, (config.parallel_envs, model.state_dim))
        self.ages = np.zeros(config.parallel_envs, dtype=int)

    def step(self, agents: AgentNetworks, noise: float, buffer: ReplayBuffer):
        model = self.model
        controls = agents.actor_u(self.states)
        disturbances = agents.actor_d(self.states)
        if noise > 0:
            controls = model.control_bounds.clip(
                controls + self.rng.normal(size=controls.shape) * noise * model.control_bounds.width
            )
            disturbances = model.disturbance_bounds.clip(
                disturbances + self.rng.normal(size=disturbances.shape) * noise * model.disturbance_bounds.width
            )
        next_states = model.step_batch(self.states, controls, disturbances)
        buffer.add(self.states, controls, disturbances, next_states)
        self.states = next_states
        self.ages += 1
        outside = ~np.all((next_states >= self.domain.low) & (next_states <= self.domain.high), axis=1)
        restart = outside | (self.ages >= self.horizon)
        if restart.any():
            self.states[restart] = self.rng.uniform(
                self.domain.low, self.domain.high, (int(restart.sum()), model.state_dim)
            )
            self.ages[restart] = 0


def train_stage(
    stage: str,
    model: SystemModel,
    domain: Box,
    config: DDPGConfig,
    critic_loss: Callable[..., Tuple[float, List[np.ndarray]]],
    seed: int,
    reference: Optional[Reference] = None,
    evaluator: Callable[[MLP], Callable[[np.ndarray], np.ndarray]] = CriticValue,
) -> Tuple[AgentNetworks, List[Snapshot]]:
    """Train one critic with its two actors.

    ``critic_loss(states, critic, actor_u, actor_d, target_critic)`` returns
    the loss and the critic gradients. The stage stops at the iteration cap or
    once the sign agreement with ``reference`` stops improving.
    """
    rng = np.random.default_rng(seed)
    agents = build_networks(model, domain, config, seed)
    check_gradients(stage, agents, domain, config, seed)
    targets = agents.copy()
    critic_opt = Adam(agents.critic.parameters(), config.critic_rate)
    control_opt = Adam(agents.actor_u.parameters(), config.actor_rate)
    disturbance_opt = Adam(agents.actor_d.parameters(), config.actor_rate)
    buffer = ReplayBuffer(
        config.buffer_capacity, model.state_dim, model.control_dim, model.disturbance_dim, seed=seed
    )
    environments = _Environments(model, domain, config, rng)
    while len(buffer) < min(config.warmup, config.buffer_capacity):
        environments.step(agents, config.noise_scale, buffer)

    history: List[Snapshot] = []
    best, stale = -1.0, 0
    for iteration in range(1, config.iterations + 1):
        noise = config.noise_scale * (1.0 - (iteration - 1) / config.iterations)
        environments.step(agents, noise, buffer)
        states = buffer.sample(config.batch_size).states

        loss, grads = critic_loss(states, agents.critic, targets.actor_u, targets.actor_d, targets.critic)
        critic_opt.step(grads)
        directions = actor_update(model, states, agents.critic, agents.actor_u, agents.actor_d)
        control_opt.step([-grad for grad in directions.control])
        disturbance_opt.step([-grad for grad in directions.disturbance])
        targets.soft_update(agents, config.tau)

        if not np.isfinite(loss) or loss > config.loss_ceiling or not agents.is_finite():
            snapshot = history[-1] if history else None
            raise TrainingFailureError(
                f"Stage {stage} diverged at iteration {iteration}.",
                {
                    "stage": stage,
                    "iteration": iteration,
                    "critic_loss": float(loss),
                    "snapshot": asdict(snapshot) if snapshot else None,
                },
            )

        if iteration % config.eval_every == 0 or iteration == config.iterations:
            agreement = reference.agreement(evaluator(agents.critic)) if reference is not None else None
            snapshot = Snapshot(stage, iteration, loss, directions.objective, noise, agreement)
            history.append(snapshot)
            logger.info(
                "%s iteration %d: critic loss %.3e, actor objective %.4f, sign agreement %s",
                stage,
                iteration,
                loss,
                directions.objective,
                "n/a" if agreement is None else f"{agreement:.4f}",
            )
            if agreement is not None:
                if agreement > best + config.plateau_delta:
                    best, stale = agreement, 0
                else:
                    stale += 1
                if stale >= config.patience:
                    logger.info("%s sign agreement plateaued at %.4f.", stage, best)
                    break
    return agents, history


def train_two_step(
    model: SystemModel,
    config: DDPGConfig,
    domain: Box,
    h_reference: Optional[Reference] = None,
    v_reference: Optional[Reference] = None,
) -> TwoStepResult:
    """Train H, freeze it into an H_g splice, then train V against the splice."""
    h_seed, v_seed = _network_seeds(config.seed, 2)

    def h_loss(states, critic, actor_u, actor_d, target_critic):
        return critic_loss_H(model, states, critic, actor_u, actor_d, config.gamma, target_critic)

    h_agents, history = train_stage("H", model, domain, config, h_loss, h_seed, h_reference)
    hg = NeuralHg(h_agents.critic.copy(), model)

    def v_loss(states, critic, actor_u, actor_d, target_critic):
        return critic_loss_V(model, states, critic, hg, actor_u, actor_d, config.gamma, target_critic)

    v_agents, v_history = train_stage("V", model, domain, config, v_loss, v_seed, v_reference)
    return TwoStepResult(h=h_agents, hg=hg, v=v_agents, history=history + v_history)


NETWORK_NAMES = ("h_critic", "h_actor_u", "h_actor_d", "v_critic", "v_actor_u", "v_actor_d")


def _named_networks(result: TwoStepResult) -> Dict[str, MLP]:
    return {
        "h_critic": result.h.critic,
        "h_actor_u": result.h.actor_u,
        "h_actor_d": result.h.actor_d,
        "v_critic": result.v.critic,
        "v_actor_u": result.v.actor_u,
        "v_actor_d": result.v.actor_d,
    }


def save_checkpoint(
    result: TwoStepResult, config: DDPGConfig, path: PathLike, meta: Optional[Dict[str, Any]] = None
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_FORMAT_VERSION,
        "meta": dict(meta or {}),
        "config": config.as_dict(),
        "networks": {name: network.as_document() for name, network in _named_networks(result).items()},
    }
    with open(path, "w") as json_file:
        json.dump(document, json_file, sort_keys=True)
        json_file.write("\n")
    return path


@reads_artifact
def load_checkpoint(path: PathLike, model: SystemModel) -> Tuple[TwoStepResult, DDPGConfig]:
    with open(path) as json_file:
        document = json.load(json_file)
    if document.get("format") != CHECKPOINT_FORMAT:
        raise ArtifactError("Not a DDPG checkpoint.", {"path": str(path)})
    networks = {name: MLP.from_document(document["networks"][name]) for name in NETWORK_NAMES}
    result = TwoStepResult(
        h=AgentNetworks(networks["h_critic"], networks["h_actor_u"], networks["h_actor_d"]),
        hg=NeuralHg(networks["h_critic"], model),
        v=AgentNetworks(networks["v_critic"], networks["v_actor_u"], networks["v_actor_d"]),
    )
    return result, DDPGConfig(**document["config"])


LOSS_COLUMNS = ("stage", "iteration", "critic_loss", "actor_objective", "noise", "sign_agreement")


def write_loss_csv(history: List[Snapshot], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as csv_file:
        writer = csv.writer(csv_file, lineterminator="\n")
        writer.writerow(LOSS_COLUMNS)
        for snapshot in history:
            row = asdict(snapshot)
            writer.writerow(["" if row[column] is None else row[column] for column in LOSS_COLUMNS])
    return path
