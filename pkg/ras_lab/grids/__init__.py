from .lattice import (  # noqa F401
    DEFAULT_GRIDS,
    GridSpec,
    action_lattice,
    flat_index,
    multi_index,
    node_state,
    node_states,
)
from .values import ValueGrid, interpolate, interpolate_many, sign_agreement, stencil, sup_gap  # noqa F401
