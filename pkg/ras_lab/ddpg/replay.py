"""Fixed-capacity transition store with seeded uniform sampling."""
from dataclasses import dataclass

import numpy as np

from ras_lab.utils.exceptions import ValidationError


@dataclass
class Transitions:
    states: np.ndarray
    controls: np.ndarray
    disturbances: np.ndarray
    next_states: np.ndarray

    def __len__(self):
        return len(self.states)


class ReplayBuffer:
    """Circular buffer; once full, new transitions overwrite the oldest."""

    def __init__(self, capacity: int, state_dim: int, control_dim: int, disturbance_dim: int, seed: int = 0):
        if capacity < 1:
            raise ValidationError("Replay capacity must be positive.", {"capacity": capacity})
        self.capacity = capacity
        self.states = np.zeros((capacity, state_dim))
        self.controls = np.zeros((capacity, control_dim))
        self.disturbances = np.zeros((capacity, disturbance_dim))
        self.next_states = np.zeros((capacity, state_dim))
        self.cursor = 0
        self.size = 0
        self.rng = np.random.default_rng(seed)

    def __len__(self):
        return self.size

    def add(self, states, controls, disturbances, next_states):
        """Append a batch of transitions stacked on the first axis."""
        states = np.atleast_2d(states)
        count = len(states)
        slots = (self.cursor + np.arange(count)) % self.capacity
        self.states[slots] = states
        self.controls[slots] = np.atleast_2d(controls)
        self.disturbances[slots] = np.atleast_2d(disturbances)
        self.next_states[slots] = np.atleast_2d(next_states)
        self.cursor = int((self.cursor + count) % self.capacity)
        self.size = min(self.size + count, self.capacity)

    def sample(self, batch_size: int) -> Transitions:
        if self.size == 0:
            raise ValidationError("Cannot sample from an empty replay buffer.")
        picks = self.rng.integers(0, self.size, batch_size)
        return Transitions(
            states=self.states[picks],
            controls=self.controls[picks],
            disturbances=self.disturbances[picks],
            next_states=self.next_states[picks],
        )
