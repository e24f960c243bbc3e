"""functional layers, optimizers and checkpoints over torch autograd"""
from .checkpoint import read_checkpoint, write_checkpoint
from .functional import batch_norm2d, bigru, conv2d, gru, linear, max_pool2d, mse_loss, relu
from .gradcheck import GradCheckReport, grad_check
from .optim import OptimizerState, adamw_step, sgd_step, step_decay
from .params import ParamSet, check_aligned

__all__ = [
    "GradCheckReport",
    "OptimizerState",
    "ParamSet",
    "adamw_step",
    "batch_norm2d",
    "bigru",
    "check_aligned",
    "conv2d",
    "grad_check",
    "gru",
    "linear",
    "max_pool2d",
    "mse_loss",
    "read_checkpoint",
    "relu",
    "sgd_step",
    "step_decay",
    "write_checkpoint",
]
