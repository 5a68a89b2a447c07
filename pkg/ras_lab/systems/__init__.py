from .benchmarks import (  # noqa F401
    BenchmarkId,
    Box,
    CartModel,
    CartParams,
    ChaseModel,
    ChaseParams,
    Region,
    SystemModel,
    build_model,
    constraint_l,
    gbar,
    step,
    target_reward_g,
)
