"""Closed-loop policies used by rollouts.

Every policy exposes ``control(x)`` and ``adversary(x, u)``; the adversary is
the companion worst-case disturbance the policy was computed against.
"""
from typing import Callable, Optional

import numpy as np

from ras_lab.ddpg.mlp import MLP
from ras_lab.utils.exceptions import InvalidStateError

REACH = "reach"
STAY = "stay"


class ActorPolicy:
    """A trained control actor paired with its disturbance actor."""

    def __init__(self, actor_u: MLP, actor_d: MLP, label: str = ""):
        self.actor_u = actor_u
        self.actor_d = actor_d
        self.label = label

    def control(self, x) -> np.ndarray:
        return self.actor_u(np.asarray(x, dtype=float)[None])[0]

    def adversary(self, x, u=None) -> np.ndarray:
        return self.actor_d(np.asarray(x, dtype=float)[None])[0]


class SwitchingPolicy:
    """Reach policy while ``H_g(x) <= 0``, stay policy afterwards.

    ``hg`` is any batched evaluator: a :class:`~ras_lab.grids.values.ValueGrid`
    or a neural splice.
    """

    def __init__(self, hg: Callable[[np.ndarray], np.ndarray], reach, stay, label: str = "pi_RAS"):
        self.hg = hg
        self.reach = reach
        self.stay = stay
        self.label = label

    def hg_value(self, x) -> float:
        return float(np.asarray(self.hg(np.asarray(x, dtype=float)[None])).reshape(-1)[0])

    def branch(self, x, hg_value: Optional[float] = None) -> str:
        hg_value = self.hg_value(x) if hg_value is None else hg_value
        return REACH if hg_value <= 0 else STAY

    def active(self, x):
        return self.reach if self.branch(x) == REACH else self.stay

    def control(self, x) -> np.ndarray:
        return self.active(x).control(x)

    def adversary(self, x, u=None) -> np.ndarray:
        return self.active(x).adversary(x, u)


def ras_action(policy: SwitchingPolicy, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InvalidStateError("State must be finite.", {"state": x.tolist()})
    return policy.control(x)
