"""
One-hot atom and bond features.

Usage:
    cfg = fit_config(dev_samples)
    tensors = featurize(graph.add_supernode(), cfg)
    tensors.atom_features    # (n, cfg.atom_width) uint8
    tensors.bond_features    # (n, n, cfg.bond_width) uint8

Values absent from the config's lists encode as an all-zero block. The
supernode row carries only its is-supernode flag; supernode links only the
Supernode bond type; diagonal entries only the Self bond type.
"""

import logging
from dataclasses import dataclass, replace
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from actions.edit_action import AddAtom, AddBenzene, EditAtom
from chem.molgraph import AtomNode, BondEdge, BondStereo, BondType, ChiralTag, MolGraph, CHIRAL_ORDER
from config.feature_config import FeatureConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GraphTensors:
    atom_features: np.ndarray            # (n, h_OH)
    bond_features: np.ndarray            # (n, n, a_OH)
    adjacency: Tuple[Tuple[int, ...], ...]   # per node: neighbours incl. itself and supernode links
    reaction_class: Optional[int] = None

    @property
    def num_nodes(self) -> int:
        return self.atom_features.shape[0]

    @property
    def edge_index(self) -> Tuple[np.ndarray, np.ndarray]:
        """(receiver, sender) arrays over every adjacency entry, receivers ascending."""
        receivers = [i for i, row in enumerate(self.adjacency) for _ in row]
        senders = [j for row in self.adjacency for j in row]
        return np.asarray(receivers, dtype=np.int64), np.asarray(senders, dtype=np.int64)


def _block_offsets(blocks: Sequence[tuple]) -> List[int]:
    offsets, position = [], 0
    for _, values in blocks:
        offsets.append(position)
        position += len(values)
    return offsets


def _atom_values(atom: AtomNode) -> dict:
    return {
        'is_supernode': atom.is_supernode,
        'atomic_number': atom.atomic_number,
        'formal_charge': atom.formal_charge,
        'chiral_tag': atom.chiral_tag.value,
        'explicit_h_count': atom.explicit_h_count,
        'is_aromatic': atom.is_aromatic,
        'is_edited': atom.is_edited,
        'is_reactant': atom.is_reactant,
    }


def _bond_values(bond: BondEdge) -> dict:
    return {'bond_type': bond.bond_type.value, 'bond_stereo': bond.stereo.value, 'is_edited': bond.is_edited}


def featurize(graph: MolGraph, cfg: FeatureConfig, reaction_class: Optional[int] = None) -> GraphTensors:
    """One-hot tensors for a graph carrying a supernode."""
    n = graph.num_nodes
    atom_blocks, bond_blocks = cfg.atom_blocks, cfg.bond_blocks
    atom_offsets, bond_offsets = _block_offsets(atom_blocks), _block_offsets(bond_blocks)
    atoms = np.zeros((n, cfg.atom_width), dtype=np.uint8)
    bonds = np.zeros((n, n, cfg.bond_width), dtype=np.uint8)

    for i, atom in enumerate(graph.nodes):
        if atom.is_supernode:
            atoms[i, atom_offsets[0] + 1] = 1
            continue
        values = _atom_values(atom)
        for (name, options), offset in zip(atom_blocks, atom_offsets):
            if values[name] in options:
                atoms[i, offset + options.index(values[name])] = 1

    type_values = bond_blocks[0][1]

    def set_type(i: int, j: int, bond_type: BondType) -> None:
        if bond_type.value in type_values:
            bonds[i, j, type_values.index(bond_type.value)] = 1

    for (i, j), bond in graph.edges.items():
        if bond.bond_type is BondType.SUPERNODE:
            set_type(i, j, bond.bond_type)
            set_type(j, i, bond.bond_type)
            continue
        values = _bond_values(bond)
        for (name, options), offset in zip(bond_blocks, bond_offsets):
            if values[name] in options:
                bonds[i, j, offset + options.index(values[name])] = 1
                bonds[j, i, offset + options.index(values[name])] = 1
    for i in range(n):
        set_type(i, i, BondType.SELF)

    adjacency = tuple(tuple(sorted(graph.all_neighbors(i) + [i])) for i in range(n))
    return GraphTensors(atoms, bonds, adjacency, reaction_class)


def decode_tensors(tensors: GraphTensors, cfg: FeatureConfig) -> MolGraph:
    """Inverse of featurize when every value was known to the config; edited flags are kept."""
    atom_blocks, bond_blocks = cfg.atom_blocks, cfg.bond_blocks
    atom_offsets, bond_offsets = _block_offsets(atom_blocks), _block_offsets(bond_blocks)

    def read(row: np.ndarray, blocks, offsets) -> dict:
        values = {}
        for (name, options), offset in zip(blocks, offsets):
            hits = np.flatnonzero(row[offset:offset + len(options)])
            values[name] = options[hits[0]] if hits.size else None
        return values

    nodes = []
    for i in range(tensors.num_nodes):
        values = read(tensors.atom_features[i], atom_blocks, atom_offsets)
        if values['is_supernode']:
            nodes.append(AtomNode.supernode())
            continue
        nodes.append(AtomNode(atomic_number=values['atomic_number'], formal_charge=values['formal_charge'],
                              chiral_tag=ChiralTag(values.get('chiral_tag') or "none"),
                              explicit_h_count=values['explicit_h_count'], is_aromatic=values['is_aromatic'],
                              is_edited=values['is_edited'], is_reactant=bool(values.get('is_reactant'))))
    edges = {}
    n = tensors.num_nodes
    for i in range(n):
        for j in range(i + 1, n):
            if not tensors.bond_features[i, j].any():
                continue
            values = read(tensors.bond_features[i, j], bond_blocks, bond_offsets)
            bond_type = BondType(values['bond_type'])
            if bond_type is BondType.SUPERNODE:
                edges[(i, j)] = BondEdge(i, j, bond_type)
            else:
                edges[(i, j)] = BondEdge(i, j, bond_type, BondStereo(values.get('bond_stereo') or "none"),
                                         is_edited=bool(values['is_edited']))
    return MolGraph(tuple(nodes), edges)


def _graph_atoms(graph: MolGraph) -> Iterable[AtomNode]:
    return (a for a in graph.nodes if not a.is_supernode)


def fit_config(samples: Iterable, base: Optional[FeatureConfig] = None) -> FeatureConfig:
    """Value lists observed over source graphs, target graphs and atom-writing actions."""
    base = base if base is not None else FeatureConfig()
    numbers, charges, chirals, hydrogens = set(), set(), set(), set()

    def observe(z: int, q: int, chiral: ChiralTag, h: int) -> None:
        numbers.add(z)
        charges.add(q)
        chirals.add(chiral)
        hydrogens.add(h)

    count = 0
    for sample in samples:
        count += 1
        for graph in (sample.source, sample.target):
            for atom in _graph_atoms(graph):
                observe(atom.atomic_number, atom.formal_charge, atom.chiral_tag, atom.explicit_h_count)
        for action in sample.actions:
            if isinstance(action, AddAtom):
                observe(action.atomic_number, action.formal_charge, action.chiral_tag, action.explicit_h_count)
            elif isinstance(action, EditAtom):
                charges.add(action.formal_charge)
                chirals.add(action.chiral_tag)
                hydrogens.add(action.explicit_h_count)
            elif isinstance(action, AddBenzene):
                observe(6, 0, ChiralTag.NONE, 0)

    fitted = replace(base, atomic_numbers=sorted(numbers), formal_charges=sorted(charges),
                     chiral_tags=[c.value for c in sorted(chirals, key=CHIRAL_ORDER.get)] or ["none"],
                     explicit_h_counts=sorted(hydrogens))
    logger.info(f"Fitted features on {count} samples: atom width {fitted.atom_width}, bond width {fitted.bond_width}")
    return fitted
