from .backend import active_backend
from .model import (
    ModelParams,
    backward,
    forward,
    init_params,
    mse_loss_and_grad,
    param_count,
)
from .optim import AdamState, adam_step

__all__ = [
    "ModelParams",
    "AdamState",
    "active_backend",
    "adam_step",
    "backward",
    "forward",
    "init_params",
    "mse_loss_and_grad",
    "param_count",
]
