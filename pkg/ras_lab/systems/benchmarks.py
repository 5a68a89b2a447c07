"""Discrete-time benchmark systems with bounded adversarial disturbance.

Each model advances ``x_{t+1} = f(x_t, u_t, d_t)`` with a fixed time step and
exposes the target reward ``g`` (positive inside the target), the constraint
``l`` (non-positive inside the obstacle) and their minimum ``gbar``.

All state functions accept a single vector or a batch stacked on the leading
axes; the state components always live on the last axis.
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, fields
from enum import Enum
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np

from ras_lab.utils.exceptions import (
    InputDomainError,
    InvalidStateError,
    ValidationError,
)

logger = logging.getLogger(__name__)

DEFAULT_DT = 0.1

# Slack when checking inputs against their bounds, absorbs lattice round-off.
BOUNDS_ATOL = 1e-9


class BenchmarkId(str, Enum):
    CART2D = "cart2d"
    CHASE4D = "chase4d"


@dataclass(frozen=True)
class Box:
    """Per-dimension closed interval ``[lower_i, upper_i]``."""

    lower: Tuple[float, ...]
    upper: Tuple[float, ...]

    def __post_init__(self):
        if len(self.lower) == 0 or len(self.lower) != len(self.upper):
            raise ValidationError(
                "Box bounds must be nonempty and of equal length.",
                {"lower": list(self.lower), "upper": list(self.upper)},
            )
        for low, high in zip(self.lower, self.upper):
            if not (np.isfinite(low) and np.isfinite(high)) or low > high:
                raise ValidationError(
                    "Box requires finite bounds with lower <= upper.",
                    {"lower": list(self.lower), "upper": list(self.upper)},
                )

    @classmethod
    def symmetric(cls, bound: float, ndim: int) -> "Box":
        return cls(lower=(-bound,) * ndim, upper=(bound,) * ndim)

    @property
    def ndim(self) -> int:
        return len(self.lower)

    @property
    def low(self) -> np.ndarray:
        return np.asarray(self.lower, dtype=float)

    @property
    def high(self) -> np.ndarray:
        return np.asarray(self.upper, dtype=float)

    @property
    def width(self) -> np.ndarray:
        return self.high - self.low

    def contains(self, values: np.ndarray, atol: float = BOUNDS_ATOL) -> bool:
        values = np.asarray(values, dtype=float)
        return bool(
            np.all(values >= self.low - atol) and np.all(values <= self.high + atol)
        )

    def clip(self, values: np.ndarray) -> np.ndarray:
        return np.clip(values, self.low, self.high)


@dataclass(frozen=True)
class Region:
    """Geometric outline of a target or obstacle, used for figures.

    ``kind`` is ``"band"`` (``|x[axes[0]] - center| <= radius``) or ``"disk"``
    (Euclidean ball over ``axes``).
    """

    kind: str
    axes: Tuple[int, ...]
    center: Tuple[float, ...]
    radius: float


@dataclass(frozen=True)
class CartParams:
    target_center: float = 0.0
    obstacle_center: float = -3.0
    target_radius: float = 1.0
    obstacle_radius: float = 1.0
    control_bound: float = 3.0
    disturbance_bound: float = 2.0

    def __post_init__(self):
        if self.target_radius <= 0 or self.obstacle_radius <= 0:
            raise ValidationError("Cart radii must be positive.", self.as_dict())
        if self.control_bound <= 0 or self.disturbance_bound < 0:
            raise ValidationError("Cart input bounds must be positive.", self.as_dict())

    def as_dict(self) -> Dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class ChaseParams:
    """Planar chase in relative coordinates ``[p_r(2), v_r(2)]``.

    Reduced analogue of a drone following a ground vehicle: the target is the
    disk ``|p_r| < target_radius`` and the obstacle the disk
    ``|p_r| <= obstacle_radius``.
    """

    target_radius: float = 1.0
    obstacle_radius: float = 0.28
    control_bound: float = 1.0
    disturbance_bound: float = 0.5

    def __post_init__(self):
        if not 0 < self.obstacle_radius < self.target_radius:
            raise ValidationError(
                "Chase radii require 0 < obstacle_radius < target_radius.",
                self.as_dict(),
            )
        if not self.control_bound > self.disturbance_bound >= 0:
            raise ValidationError(
                "Chase control authority must exceed the disturbance authority.",
                self.as_dict(),
            )

    def as_dict(self) -> Dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


class SystemModel(ABC):
    """Controlled system ``x' = f(x, u, d)`` with ``u`` in U and ``d`` in D."""

    benchmark_id: BenchmarkId
    state_dim: int
    state_labels: Tuple[str, ...]

    def __init__(self, params: Any, dt: float, control_bounds: Box, disturbance_bounds: Box):
        if not dt > 0:
            raise ValidationError("Time step must be positive.", {"dt": dt})
        self.params = params
        self.dt = float(dt)
        self.control_bounds = control_bounds
        self.disturbance_bounds = disturbance_bounds

    def __repr__(self):
        return f"{type(self).__name__}(dt={self.dt}, params={self.params})"

    @property
    def control_dim(self) -> int:
        return self.control_bounds.ndim

    @property
    def disturbance_dim(self) -> int:
        return self.disturbance_bounds.ndim

    def step(self, x, u, d) -> np.ndarray:
        """Validated single transition."""
        x = self._check_state(x)
        u = np.asarray(u, dtype=float).reshape(self.control_dim)
        d = np.asarray(d, dtype=float).reshape(self.disturbance_dim)
        if not self.control_bounds.contains(u):
            raise InputDomainError(
                "Control outside its bounds.",
                {"control": u.tolist(), "lower": self.control_bounds.lower, "upper": self.control_bounds.upper},
            )
        if not self.disturbance_bounds.contains(d):
            raise InputDomainError(
                "Disturbance outside its bounds.",
                {
                    "disturbance": d.tolist(),
                    "lower": self.disturbance_bounds.lower,
                    "upper": self.disturbance_bounds.upper,
                },
            )
        return self.step_batch(x, u, d)

    @abstractmethod
    def step_batch(self, states: np.ndarray, controls: np.ndarray, disturbances: np.ndarray) -> np.ndarray:
        """Unchecked, broadcasting transition used by solvers and training."""

    @abstractmethod
    def target_reward_g(self, states: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def constraint_l(self, states: np.ndarray) -> np.ndarray:
        pass

    def gbar(self, states: np.ndarray) -> np.ndarray:
        return np.minimum(self.target_reward_g(states), self.constraint_l(states))

    @abstractmethod
    def control_jacobian(self) -> np.ndarray:
        """``df/du``, shape ``(state_dim, control_dim)``; constant since f is affine in u."""

    @abstractmethod
    def disturbance_jacobian(self) -> np.ndarray:
        """``df/dd``, shape ``(state_dim, disturbance_dim)``."""

    @abstractmethod
    def regions(self) -> Dict[str, Region]:
        """Target and obstacle outlines."""

    def describe(self) -> Dict[str, Any]:
        return {
            "benchmark": self.benchmark_id.value,
            "dt": self.dt,
            "params": self.params.as_dict(),
        }

    def _check_state(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.state_dim,):
            raise InvalidStateError(
                f"Expected a state of dimension {self.state_dim}.", {"shape": list(x.shape)}
            )
        if not np.all(np.isfinite(x)):
            raise InvalidStateError("State must be finite.", {"state": x.tolist()})
        return x


class CartModel(SystemModel):
    """Double integrator cart ``[position, velocity]`` on a track."""

    benchmark_id = BenchmarkId.CART2D
    state_dim = 2
    state_labels = ("position", "velocity")

    def __init__(self, params: Optional[CartParams] = None, dt: float = DEFAULT_DT):
        params = params or CartParams()
        super().__init__(
            params,
            dt,
            control_bounds=Box.symmetric(params.control_bound, 1),
            disturbance_bounds=Box.symmetric(params.disturbance_bound, 1),
        )

    def step_batch(self, states, controls, disturbances):
        states = np.asarray(states, dtype=float)
        accel = np.asarray(controls, dtype=float)[..., 0] + np.asarray(disturbances, dtype=float)[..., 0]
        position, velocity = states[..., 0], states[..., 1]
        dt = self.dt
        return np.stack(
            [position + dt * velocity + dt * dt * accel, velocity + dt * accel], axis=-1
        )

    def target_reward_g(self, states):
        states = np.asarray(states, dtype=float)
        return self.params.target_radius - np.abs(states[..., 0] - self.params.target_center)

    def constraint_l(self, states):
        states = np.asarray(states, dtype=float)
        return np.abs(states[..., 0] - self.params.obstacle_center) - self.params.obstacle_radius

    def control_jacobian(self):
        return np.array([[self.dt * self.dt], [self.dt]])

    def disturbance_jacobian(self):
        return np.array([[self.dt * self.dt], [self.dt]])

    def regions(self):
        return {
            "target": Region("band", (0,), (self.params.target_center,), self.params.target_radius),
            "obstacle": Region("band", (0,), (self.params.obstacle_center,), self.params.obstacle_radius),
        }


class ChaseModel(SystemModel):
    """Relative planar chase: ``p_r' = p_r + dt v_r``, ``v_r' = v_r + dt (u - d)``."""

    benchmark_id = BenchmarkId.CHASE4D
    state_dim = 4
    state_labels = ("p_x", "p_y", "v_x", "v_y")

    def __init__(self, params: Optional[ChaseParams] = None, dt: float = DEFAULT_DT):
        params = params or ChaseParams()
        super().__init__(
            params,
            dt,
            control_bounds=Box.symmetric(params.control_bound, 2),
            disturbance_bounds=Box.symmetric(params.disturbance_bound, 2),
        )

    def step_batch(self, states, controls, disturbances):
        states = np.asarray(states, dtype=float)
        accel = np.asarray(controls, dtype=float) - np.asarray(disturbances, dtype=float)
        position, velocity = states[..., :2], states[..., 2:]
        return np.concatenate(
            [position + self.dt * velocity, velocity + self.dt * accel], axis=-1
        )

    def target_reward_g(self, states):
        states = np.asarray(states, dtype=float)
        return self.params.target_radius - np.linalg.norm(states[..., :2], axis=-1)

    def constraint_l(self, states):
        states = np.asarray(states, dtype=float)
        return np.linalg.norm(states[..., :2], axis=-1) - self.params.obstacle_radius

    def control_jacobian(self):
        jacobian = np.zeros((4, 2))
        jacobian[2:, :] = self.dt * np.eye(2)
        return jacobian

    def disturbance_jacobian(self):
        return -self.control_jacobian()

    def regions(self):
        return {
            "target": Region("disk", (0, 1), (0.0, 0.0), self.params.target_radius),
            "obstacle": Region("disk", (0, 1), (0.0, 0.0), self.params.obstacle_radius),
        }


MODELS = {
    BenchmarkId.CART2D: (CartModel, CartParams),
    BenchmarkId.CHASE4D: (ChaseModel, ChaseParams),
}


def build_model(
    benchmark_id, dt: float = DEFAULT_DT, params: Optional[Mapping[str, float]] = None
) -> SystemModel:
    """Instantiate a bundled benchmark by id, overriding any of its constants."""
    try:
        benchmark_id = BenchmarkId(benchmark_id)
    except ValueError:
        raise ValidationError(
            f"Unknown benchmark '{benchmark_id}'.",
            {"choices": [choice.value for choice in BenchmarkId]},
        ) from None
    model_class, params_class = MODELS[benchmark_id]
    known = {f.name for f in fields(params_class)}
    unknown = sorted(set(params or {}) - known)
    if unknown:
        raise ValidationError(
            "Unknown benchmark parameters.", {"unknown": unknown, "known": sorted(known)}
        )
    return model_class(params_class(**dict(params or {})), dt=dt)


def step(model: SystemModel, x, u, d) -> np.ndarray:
    return model.step(x, u, d)


def target_reward_g(model: SystemModel, x) -> float:
    return float(model.target_reward_g(np.asarray(x, dtype=float)))


def constraint_l(model: SystemModel, x) -> float:
    return float(model.constraint_l(np.asarray(x, dtype=float)))


def gbar(model: SystemModel, x) -> float:
    return float(model.gbar(np.asarray(x, dtype=float)))
