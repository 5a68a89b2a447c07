import factory
from factory import Faker
from factory.django import DjangoModelFactory

from ras_lab.grids.lattice import GridSpec
from ras_lab.runs.config import BenchmarkSpec, EvaluationSpec, RenderSpec, RunConfig, SolverSettings
from ras_lab.runs.models import SolveRun

COARSE_CART_YAML = """\
benchmark:
  id: cart2d
grid:
  lower: [-6.0, -4.0]
  upper: [6.0, 4.0]
  counts: [61, 41]
solver:
  gamma: 0.95
  tolerance: 1.0e-5
  max_sweeps: 5000
evaluation:
  count: 20
  horizon: 300
  modes: [adversarial]
  policies: [ras, ra]
  saved_trajectories: 2
render:
  trajectories: 2
  scale: 1
seed: 3
"""


class RunConfigFactory(factory.Factory):
    """Coarse cart run, quick enough for the default test selection."""

    benchmark = factory.LazyFunction(BenchmarkSpec)
    grid = factory.LazyFunction(lambda: GridSpec(lower=(-6.0, -4.0), upper=(6.0, 4.0), counts=(61, 41)))
    solver = factory.LazyFunction(lambda: SolverSettings(gamma=0.95, tolerance=1e-5, max_sweeps=5000))
    evaluation = factory.LazyFunction(lambda: EvaluationSpec(count=20, horizon=100, saved_trajectories=2))
    render = factory.LazyFunction(lambda: RenderSpec(trajectories=2, scale=1))
    seed = factory.Sequence(lambda n: n)

    class Meta:
        model = RunConfig


class SolveRunFactory(DjangoModelFactory):

    subcommand = "solve-h"
    benchmark = "cart2d"
    config_hash = Faker("sha256")
    seed = factory.Sequence(lambda n: n)
    output_dir = Faker("file_path", depth=2)

    class Meta:
        model = SolveRun
