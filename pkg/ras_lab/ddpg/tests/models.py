import numpy as np

from ras_lab.systems.benchmarks import Box, SystemModel


class StationaryModel(SystemModel):
    """One-dimensional system that never moves, with constant rewards."""

    state_dim = 1
    state_labels = ("x",)

    def __init__(self, g: float = 1.0, constraint: float = 1.0):
        super().__init__(None, 1.0, Box.symmetric(1.0, 1), Box.symmetric(1.0, 1))
        self.g = g
        self.constraint = constraint

    def step_batch(self, states, controls, disturbances):
        return np.array(states, dtype=float)

    def target_reward_g(self, states):
        return np.full(np.shape(states)[:-1], self.g)

    def constraint_l(self, states):
        return np.full(np.shape(states)[:-1], self.constraint)

    def control_jacobian(self):
        return np.zeros((1, 1))

    def disturbance_jacobian(self):
        return np.zeros((1, 1))

    def regions(self):
        return {}
