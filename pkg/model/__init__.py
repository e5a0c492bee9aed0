# model/__init__.py
from .bundle import LoadedModel, load_model, save_model
from .megan import (MeganModel, StepState, action_logits, decode, embed, encode, forward_step, gcn_att_layer,
                    init_params, pad_previous, parameter_count, parameter_shapes)

__all__ = [
    'MeganModel',
    'StepState',
    'embed',
    'gcn_att_layer',
    'encode',
    'decode',
    'pad_previous',
    'action_logits',
    'forward_step',
    'init_params',
    'parameter_shapes',
    'parameter_count',
    'LoadedModel',
    'save_model',
    'load_model',
]
