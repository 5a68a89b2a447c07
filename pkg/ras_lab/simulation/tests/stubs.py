import numpy as np


class ConstantPolicy:
    def __init__(self, control, disturbance=0.0, label=""):
        self.value = np.array([control])
        self.disturbance = np.array([disturbance])
        self.label = label

    def control(self, x):
        return self.value

    def adversary(self, x, u=None):
        return self.disturbance


def constant_hg(level):
    return lambda states: np.full(len(states), level)
