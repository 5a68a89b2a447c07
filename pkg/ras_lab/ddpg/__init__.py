from .losses import (  # noqa F401
    ActorGradients,
    actor_update,
    actor_update_H,
    actor_update_V,
    critic_loss_H,
    critic_loss_V,
    h_residuals,
    mean_square,
    v_residuals,
)
from .mlp import MLP, Adam, mlp_gradient_check  # noqa F401
from .replay import ReplayBuffer, Transitions  # noqa F401
from .training import (  # noqa F401
    AgentNetworks,
    CriticValue,
    DDPGConfig,
    NeuralHg,
    Reference,
    Snapshot,
    TwoStepResult,
    load_checkpoint,
    save_checkpoint,
    train_stage,
    train_two_step,
    write_loss_csv,
)
