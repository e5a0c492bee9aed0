# numcore/__init__.py
from . import ops
from .checkpoint import CHECKPOINT_FORMAT_VERSION, CheckpointBundle, load_checkpoint, save_checkpoint
from .exceptions import GraphDetached, NonFiniteLoss, NumericError, ShapeMismatch
from .params import Adam, ParamStore, adam_step
from .tensor import Tape, Tensor, as_tensor, backward, grad_enabled, no_grad

__all__ = [
    'ops', 'Tensor', 'Tape', 'backward', 'as_tensor', 'no_grad', 'grad_enabled',
    'ParamStore', 'Adam', 'adam_step',
    'CheckpointBundle', 'save_checkpoint', 'load_checkpoint', 'CHECKPOINT_FORMAT_VERSION',
    'NumericError', 'ShapeMismatch', 'GraphDetached', 'NonFiniteLoss',
]
