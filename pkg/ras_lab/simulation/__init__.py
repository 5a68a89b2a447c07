from .evaluation import (  # noqa F401
    EvalReport,
    SuccessCounts,
    evaluate_success,
    node_volumes,
    sample_initial_states,
    set_area,
    write_report_json,
)
from .policies import ActorPolicy, SwitchingPolicy, ras_action  # noqa F401
from .rollout import (  # noqa F401
    DisturbanceMode,
    TrajectoryRecord,
    read_trajectory_jsonl,
    rollout,
    rollout_many,
    trajectory_seed,
    write_trajectory_jsonl,
)
