# actions/__init__.py
from .edit_action import (ActionKind, ActionTarget, AddAtom, AddBenzene, EditAction, EditAtom, EditBond, Stop,
                          action_from_line, action_to_line)
from .apply import ActionOutcome, apply_action, apply_sequence, stop_target
from .vocab import ActionVocab
from .layout import ActionLayout, action_space_layout
from .exceptions import InvalidTarget

__all__ = [
    'ActionKind', 'ActionTarget', 'AddAtom', 'AddBenzene', 'EditAction', 'EditAtom', 'EditBond', 'Stop',
    'action_from_line', 'action_to_line',
    'ActionOutcome', 'apply_action', 'apply_sequence', 'stop_target',
    'ActionVocab', 'ActionLayout', 'action_space_layout', 'InvalidTarget',
]
