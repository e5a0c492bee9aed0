# chem/__init__.py
from .exceptions import ChemError, SmilesSyntaxError, ValenceError, UnsupportedFeatureError, AlreadyPresent
from .molgraph import AtomNode, BondEdge, BondStereo, BondType, ChiralTag, MolGraph, pair
from .smiles_parser import parse_smiles
from .smiles_writer import write_smiles, canonical_smiles, canonical_ranks
from .aromaticity import perceive_aromaticity, normalize_hydrogens
from .stereo import permute_graph
from .valence import check_valence, is_valence_ok

__all__ = [
    'ChemError', 'SmilesSyntaxError', 'ValenceError', 'UnsupportedFeatureError', 'AlreadyPresent',
    'AtomNode', 'BondEdge', 'BondStereo', 'BondType', 'ChiralTag', 'MolGraph', 'pair',
    'parse_smiles', 'write_smiles', 'canonical_smiles', 'canonical_ranks',
    'perceive_aromaticity', 'normalize_hydrogens', 'permute_graph',
    'check_valence', 'is_valence_ok',
]
