import pytest

from ras_lab.ddpg.tests.models import StationaryModel
from ras_lab.ddpg.training import DDPGConfig


@pytest.fixture
def stationary() -> StationaryModel:
    return StationaryModel()


@pytest.fixture
def small_ddpg_config() -> DDPGConfig:
    return DDPGConfig(
        hidden=(8, 8),
        batch_size=32,
        iterations=300,
        eval_every=100,
        buffer_capacity=2000,
        warmup=64,
        parallel_envs=4,
        horizon=20,
        seed=7,
    )
