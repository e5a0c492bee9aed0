"""
Semantics of a single edit action.

apply_action never validates chemistry; valence is only checked once a whole
sequence has been applied. Redundant actions (deleting a missing bond,
rewriting an atom with its own values) return the input graph.
"""

import logging
from dataclasses import replace
from typing import Iterable, NamedTuple

from chem.molgraph import AtomNode, BondEdge, BondStereo, BondType, MolGraph

from .edit_action import ActionKind, ActionTarget, AddAtom, AddBenzene, EditAction, EditAtom, EditBond
from .exceptions import InvalidTarget

logger = logging.getLogger(__name__)

BENZENE_SIZE = 6


class ActionOutcome(NamedTuple):
    graph: MolGraph
    terminated: bool


def _mark_edited(graph: MolGraph, indices: Iterable[int]) -> MolGraph:
    nodes = list(graph.nodes)
    for i in indices:
        if not nodes[i].is_edited:
            nodes[i] = replace(nodes[i], is_edited=True)
    return MolGraph(tuple(nodes), dict(graph.edges))


def _check_atom(graph: MolGraph, index: int, action: EditAction) -> None:
    if index < 0 or index >= graph.num_nodes:
        raise InvalidTarget(f"{action.kind.value} targets missing node {index} (graph has {graph.num_nodes})")
    if graph.nodes[index].is_supernode:
        raise InvalidTarget(f"{action.kind.value} cannot target the supernode")


def _edit_atom(graph: MolGraph, action: EditAtom, target: ActionTarget) -> MolGraph:
    _check_atom(graph, target.atom, action)
    atom = graph.nodes[target.atom]
    edited = replace(atom, formal_charge=action.formal_charge, chiral_tag=action.chiral_tag,
                     explicit_h_count=action.explicit_h_count, is_aromatic=action.is_aromatic)
    if edited == atom:
        return graph
    return graph.with_atom(target.atom, replace(edited, is_edited=True))


def _edit_bond(graph: MolGraph, action: EditBond, target: ActionTarget) -> MolGraph:
    if not target.is_pair:
        raise InvalidTarget("EditBond needs an atom pair")
    i, j = target.atom, target.partner
    _check_atom(graph, i, action)
    _check_atom(graph, j, action)
    current = graph.bond(i, j)
    if action.is_delete:
        if current is None:
            return graph
        return _mark_edited(graph.without_bond(i, j), (i, j))
    if current is not None and current.bond_type is action.bond_type and current.stereo is action.stereo:
        return graph
    bond = BondEdge(i, j, action.bond_type, action.stereo, is_edited=True)
    return _mark_edited(graph.with_bond(bond), (i, j))


def _add_atom(graph: MolGraph, action: AddAtom, target: ActionTarget) -> MolGraph:
    anchor = target.atom
    _check_atom(graph, anchor, action)
    atom = AtomNode(atomic_number=action.atomic_number, formal_charge=action.formal_charge,
                    chiral_tag=action.chiral_tag, explicit_h_count=action.explicit_h_count,
                    is_aromatic=action.is_aromatic, is_edited=True, is_reactant=graph.nodes[anchor].is_reactant)
    grown, index = graph.with_new_atom(atom)
    grown = grown.with_bond(BondEdge(anchor, index, action.bond_type, action.bond_stereo, is_edited=True))
    return _mark_edited(grown, (anchor,))


def _add_benzene(graph: MolGraph, action: AddBenzene, target: ActionTarget) -> MolGraph:
    anchor = target.atom
    _check_atom(graph, anchor, action)
    if graph.nodes[anchor].atomic_number != 6:
        raise InvalidTarget(f"AddBenzene anchor {anchor} is not a carbon")
    carbon = AtomNode(atomic_number=6, is_aromatic=True, is_edited=True,
                      is_reactant=graph.nodes[anchor].is_reactant)
    ring = []
    grown = graph
    for _ in range(BENZENE_SIZE):
        grown, index = grown.with_new_atom(carbon)
        ring.append(index)
    grown = grown.with_bond(BondEdge(anchor, ring[0], BondType.SINGLE, BondStereo.NONE, is_edited=True))
    for k in range(BENZENE_SIZE):
        a, b = sorted((ring[k], ring[(k + 1) % BENZENE_SIZE]))
        grown = grown.with_bond(BondEdge(a, b, BondType.AROMATIC, BondStereo.NONE, is_edited=True))
    return _mark_edited(grown, (anchor,))


def apply_action(graph: MolGraph, action: EditAction, target: ActionTarget) -> ActionOutcome:
    """Apply one action; Stop leaves the graph untouched and terminates the sequence."""
    kind = action.kind
    if kind is ActionKind.STOP:
        if graph.has_supernode and target.atom != graph.supernode_index:
            raise InvalidTarget("Stop is only predicted at the supernode")
        return ActionOutcome(graph, True)
    if kind is ActionKind.EDIT_ATOM:
        return ActionOutcome(_edit_atom(graph, action, target), False)
    if kind is ActionKind.EDIT_BOND:
        return ActionOutcome(_edit_bond(graph, action, target), False)
    if kind is ActionKind.ADD_ATOM:
        return ActionOutcome(_add_atom(graph, action, target), False)
    if kind is ActionKind.ADD_BENZENE:
        return ActionOutcome(_add_benzene(graph, action, target), False)
    raise InvalidTarget(f"unknown action {action!r}")


def apply_sequence(graph: MolGraph, steps: Iterable) -> MolGraph:
    """Apply (action, target) pairs until Stop."""
    for action, target in steps:
        graph, terminated = apply_action(graph, action, target)
        if terminated:
            break
    return graph


def stop_target(graph: MolGraph) -> ActionTarget:
    return ActionTarget(graph.supernode_index if graph.has_supernode else graph.num_nodes)


