import factory
import numpy as np

from ras_lab.grids.lattice import GridSpec
from ras_lab.solvers.config import QLearnConfig, SolverConfig


class GridSpecFactory(factory.Factory):
    lower = (-6.0, -4.0)
    upper = (6.0, 4.0)
    counts = (61, 41)

    class Meta:
        model = GridSpec


class SolverConfigFactory(factory.Factory):
    """Single-input lattices for unit-sized games."""

    control_lattice = factory.LazyFunction(lambda: np.array([[-1.0], [1.0]]))
    disturbance_lattice = factory.LazyFunction(lambda: np.array([[-1.0], [1.0]]))
    gamma = 0.9
    tolerance = 1e-10
    max_sweeps = 5000

    class Meta:
        model = SolverConfig


class QLearnConfigFactory(factory.Factory):
    initial_rate = 0.5
    decay = 2000.0
    episodes = 20
    horizon = 50
    batch_size = 64
    exploration = 1.0
    seed = factory.Sequence(lambda n: n)

    class Meta:
        model = QLearnConfig
