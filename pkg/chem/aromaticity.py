"""
Aromaticity perception and hydrogen normalization.

Parsing trusts lowercase atoms; `perceive_aromaticity` is only run on graphs
produced by edit actions, where a Kekule ring may have been closed.
"""

import logging
from dataclasses import replace
from typing import List, Set

import networkx as nx

from .molgraph import BondStereo, BondType, MolGraph
from .valence import implicit_h_count

logger = logging.getLogger(__name__)

_LONE_PAIR_DONORS = {7, 8, 15, 16, 34}
_RING_SIZES = (5, 6, 7)


def normalize_hydrogens(graph: MolGraph) -> MolGraph:
    """Fold explicit hydrogens that the valence model would add anyway."""
    nodes = list(graph.nodes)
    changed = False
    for i, atom in enumerate(graph.nodes):
        if atom.is_supernode:
            continue
        total = graph.total_h(i)
        default = implicit_h_count(graph, i, explicit=0)
        explicit = 0 if total == default else total
        if explicit != atom.explicit_h_count:
            nodes[i] = replace(atom, explicit_h_count=explicit)
            changed = True
    return MolGraph(tuple(nodes), dict(graph.edges)) if changed else graph


def _pi_electrons(graph: MolGraph, atom_index: int, ring_system: Set[int]) -> int:
    """Electrons an atom donates to a ring, -1 if it cannot be part of an aromatic ring."""
    atom = graph.nodes[atom_index]
    doubles_in_system = 0
    exocyclic_double = False
    for j in graph.neighbors(atom_index):
        bond = graph.bond(atom_index, j)
        if bond.bond_type is BondType.AROMATIC and j in ring_system:
            doubles_in_system += 1 if atom.is_aromatic else 0
        elif bond.bond_type is BondType.DOUBLE:
            if j in ring_system:
                doubles_in_system += 1
            else:
                exocyclic_double = True
        elif bond.bond_type is BondType.TRIPLE:
            return -1
    if doubles_in_system:
        return 1
    if exocyclic_double:
        return 0
    if atom.atomic_number == 6:
        if atom.formal_charge == -1:
            return 2
        if atom.formal_charge == 1:
            return 0
        return -1
    if atom.atomic_number in _LONE_PAIR_DONORS and atom.formal_charge <= 0:
        return 2
    return -1


def _simple_rings(graph: MolGraph) -> List[List[int]]:
    network = graph.to_networkx()
    rings = []
    for cycle in nx.minimum_cycle_basis(network):
        if len(cycle) not in _RING_SIZES:
            continue
        induced = network.subgraph(cycle)
        if induced.number_of_edges() == len(cycle):
            rings.append(sorted(cycle))
    return sorted(rings)


def perceive_aromaticity(graph: MolGraph) -> MolGraph:
    """Mark Huckel (4n+2) rings of 5-7 atoms aromatic, keeping every hydrogen count."""
    rings = _simple_rings(graph.without_supernode())
    if not rings:
        return graph
    ring_system: Set[int] = set()
    for ring in rings:
        ring_system.update(ring)

    aromatic_atoms: Set[int] = set()
    aromatic_bonds = set()
    for ring in rings:
        members = set(ring)
        ring_bonds = [(i, j) for (i, j), b in graph.edges.items()
                      if i in members and j in members and b.bond_type.is_chemical]
        if all(graph.bond(i, j).bond_type is BondType.AROMATIC for i, j in ring_bonds):
            continue
        electrons = [_pi_electrons(graph, i, ring_system) for i in ring]
        if min(electrons) < 0:
            continue
        if sum(electrons) % 4 != 2:
            continue
        aromatic_atoms.update(ring)
        aromatic_bonds.update(ring_bonds)

    if not aromatic_atoms:
        return graph
    totals = {i: graph.total_h(i) for i in aromatic_atoms}
    nodes = list(graph.nodes)
    for i in aromatic_atoms:
        nodes[i] = replace(nodes[i], is_aromatic=True)
    edges = dict(graph.edges)
    for key in aromatic_bonds:
        edges[key] = replace(edges[key], bond_type=BondType.AROMATIC, stereo=BondStereo.NONE)
    perceived = MolGraph(tuple(nodes), edges)
    # freeze the hydrogen counts the Kekule form carried, then fold them back
    for i, total in totals.items():
        perceived = perceived.with_atom(i, replace(perceived.nodes[i], explicit_h_count=0))
        implicit = implicit_h_count(perceived, i)
        if implicit != total:
            perceived = perceived.with_atom(i, replace(perceived.nodes[i], explicit_h_count=total))
    logger.debug(f"Perceived {len(aromatic_atoms)} aromatic atoms")
    return normalize_hydrogens(perceived)
