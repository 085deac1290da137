"""Float64 autodiff tensors, the attention Q-network, and Adam."""
from . import tensor
from .adam import Adam
from .network import (
    D_MODEL,
    HEAD_DIM,
    LANES_PER_PHASE,
    N_HEADS,
    PARAM_SHAPES,
    PHASE_SLOTS_FLAT,
    QNetwork,
    self_attention,
)
from .tensor import Tensor

__all__ = [
    "Adam",
    "D_MODEL",
    "HEAD_DIM",
    "LANES_PER_PHASE",
    "N_HEADS",
    "PARAM_SHAPES",
    "PHASE_SLOTS_FLAT",
    "QNetwork",
    "Tensor",
    "self_attention",
    "tensor",
]
