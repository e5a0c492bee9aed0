# oracle/__init__.py
from .exceptions import (OracleError, MappingError, UnreachableAtoms, InternalInconsistency, SequenceTooLong,
                         ReconstructionError)
from .reaction import Direction, Reaction, reaction_from_smiles, comparison_smiles, main_component
from .pending import NewAtom, Addition, PendingEditSet, diff_reaction
from .ordering import OrderingStrategy, OrderingPolicy, OracleState, EditGroup, candidates, next_action
from .sequence import TrainingSample, generate_sequence
from .vocab_builder import SequenceStatistics, build_vocab

__all__ = [
    'OracleError', 'MappingError', 'UnreachableAtoms', 'InternalInconsistency', 'SequenceTooLong',
    'ReconstructionError',
    'Direction', 'Reaction', 'reaction_from_smiles', 'comparison_smiles', 'main_component',
    'NewAtom', 'Addition', 'PendingEditSet', 'diff_reaction',
    'OrderingStrategy', 'OrderingPolicy', 'OracleState', 'EditGroup', 'candidates', 'next_action',
    'TrainingSample', 'generate_sequence',
    'SequenceStatistics', 'build_vocab',
]
