from .config import QLearnConfig, SolverConfig  # noqa F401
from .games import FiniteGame, GridGame, TableGame, game_tree_value, minimax_at  # noqa F401
from .policies import LookaheadPolicy, TabularPolicy  # noqa F401
from .qlearning import q_learning, q_learning_H, q_learning_V  # noqa F401
from .tabular import (  # noqa F401
    ConvergenceReport,
    Solution,
    bellman_backup_H,
    bellman_backup_V,
    build_Hg,
    closure_slack,
    extract_policy,
    invariance_closure,
    solve_H,
    solve_V,
    solve_V_RA,
    value_iteration,
)
