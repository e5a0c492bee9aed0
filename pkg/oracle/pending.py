"""
Ground-truth edit set between a mapped source graph and its target.

Atoms that exist only in the target are referred to as NewAtom(target index)
until an AddAtom/AddBenzene action creates them; source atoms are plain ints.
Target-only atoms are attached through a BFS spanning forest rooted at the
mapped atoms; every target bond not covered by that forest becomes an
EditBond between the two (eventually realized) endpoints.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Set, Tuple, Union

import networkx as nx

from actions.edit_action import AddAtom, AddBenzene, EditAtom, EditBond
from chem.molgraph import BondStereo, BondType, ChiralTag, MolGraph
from chem.stereo import HYDROGEN, chiral_reference, reorder_chiral_tag, stereo_in_default_frame, stereo_reference

from .exceptions import MappingError, UnreachableAtoms
from .reaction import Reaction

logger = logging.getLogger(__name__)

_ROOT = -1
_RING = 6


@dataclass(frozen=True, order=True)
class NewAtom:
    target_index: int


NodeRef = Union[int, NewAtom]


def ref_key(ref: NodeRef) -> tuple:
    """Orders source atoms before target-only atoms."""
    return (1, ref.target_index) if isinstance(ref, NewAtom) else (0, ref)


def ref_pair(a: NodeRef, b: NodeRef) -> Tuple[NodeRef, NodeRef]:
    return (a, b) if ref_key(a) <= ref_key(b) else (b, a)


@dataclass(frozen=True)
class Addition:
    """One AddAtom/AddBenzene; `created` lists the target atoms it creates, in creation order."""
    anchor: NodeRef
    action: Union[AddAtom, AddBenzene]
    created: Tuple[int, ...]


@dataclass
class PendingEditSet:
    atom_edits: Dict[int, EditAtom] = field(default_factory=dict)
    bond_edits: Dict[Tuple[NodeRef, NodeRef], EditBond] = field(default_factory=dict)
    additions: List[Addition] = field(default_factory=list)
    benzene_counterexamples: int = 0  # rings left as AddAtom items because of the anchor bond

    def __len__(self) -> int:
        return len(self.atom_edits) + len(self.bond_edits) + len(self.additions)

    @property
    def is_empty(self) -> bool:
        return len(self) == 0

    def copy(self) -> 'PendingEditSet':
        return PendingEditSet(dict(self.atom_edits), dict(self.bond_edits), list(self.additions),
                              self.benzene_counterexamples)

    def __str__(self) -> str:
        return (f"PendingEditSet({len(self.atom_edits)} atom edits, {len(self.bond_edits)} bond edits, "
                f"{len(self.additions)} additions)")


# ---- stereo-aware comparisons -------------------------------------------


def _atom_needs_edit(source: MolGraph, target: MolGraph, s: int, t: int, corr: Dict[int, int]) -> bool:
    a, b = source.nodes[s], target.nodes[t]
    if (a.formal_charge, a.explicit_h_count, a.is_aromatic) != (b.formal_charge, b.explicit_h_count, b.is_aromatic):
        return True
    if (a.chiral_tag is ChiralTag.NONE) != (b.chiral_tag is ChiralTag.NONE):
        return True
    if b.chiral_tag is ChiralTag.NONE:
        return False
    mapped = [k if k == HYDROGEN else corr[k] for k in chiral_reference(source, s)]
    reference = chiral_reference(target, t)
    if sorted(mapped) != sorted(reference):
        return True
    return reorder_chiral_tag(a.chiral_tag, mapped, reference) is not b.chiral_tag


def _bond_needs_edit(source: MolGraph, target: MolGraph, si: int, sj: int, corr: Dict[int, int]) -> bool:
    a, b = source.bond(si, sj), target.bond(corr[si], corr[sj])
    if a.bond_type is not b.bond_type:
        return True
    if (a.stereo is BondStereo.NONE) != (b.stereo is BondStereo.NONE):
        return True
    if b.stereo is BondStereo.NONE:
        return False
    ti, tj = corr[si], corr[sj]
    left = sorted(corr[k] for k in source.neighbors(si) if k != sj)
    right = sorted(corr[k] for k in source.neighbors(sj) if k != si)
    if left != [k for k in target.neighbors(ti) if k != tj] or right != [k for k in target.neighbors(tj) if k != ti]:
        return True
    reference = stereo_reference(source, si, sj)
    if reference is None:
        return True
    translated = stereo_in_default_frame(target, ti, tj, a.stereo, corr[reference[0]], corr[reference[1]])
    return translated is not b.stereo


# ---- diff ------------------------------------------------------------------


def _addition_for(target: MolGraph, parent: int, child: int) -> AddAtom:
    atom = target.nodes[child]
    bond = target.bond(parent, child)
    return AddAtom(atomic_number=atom.atomic_number, formal_charge=atom.formal_charge, chiral_tag=atom.chiral_tag,
                   explicit_h_count=atom.explicit_h_count, is_aromatic=atom.is_aromatic,
                   bond_type=bond.bond_type, bond_stereo=bond.stereo)


def _spanning_forest(target: MolGraph, mapped: List[int]) -> Dict[int, int]:
    """Target-only atom -> BFS parent, searching outwards from all mapped atoms at once."""
    network = target.to_networkx()
    network.add_node(_ROOT)
    network.add_edges_from((_ROOT, t) for t in mapped)
    parents: Dict[int, int] = {}
    mapped_set = set(mapped)
    for parent, child in nx.bfs_edges(network, _ROOT, sort_neighbors=sorted):
        if child not in mapped_set:
            parents[child] = parent
    return parents


def _benzene_rings(target: MolGraph, target_only: Set[int]) -> List[List[int]]:
    """Isolated aromatic six-carbon rings made solely of plain target-only atoms."""
    network = target.to_networkx()
    rings = []
    for cycle in nx.minimum_cycle_basis(network):
        if len(cycle) != _RING or not set(cycle) <= target_only:
            continue
        members = set(cycle)
        plain = all(
            target.nodes[t].atomic_number == 6 and target.nodes[t].is_aromatic and target.nodes[t].formal_charge == 0
            and target.nodes[t].chiral_tag is ChiralTag.NONE and target.nodes[t].explicit_h_count == 0
            for t in cycle)
        if not plain:
            continue
        ring_bonds = [target.bond(x, y) for x in cycle for y in target.neighbors(x) if y in members and x < y]
        if len(ring_bonds) != _RING or any(b.bond_type is not BondType.AROMATIC for b in ring_bonds):
            continue
        fused = any(target.bond(x, y).bond_type is BondType.AROMATIC
                    for x in cycle for y in target.neighbors(x) if y not in members)
        if not fused:
            rings.append(sorted(cycle))
    return sorted(rings)


def _ring_walk(target: MolGraph, ring: List[int], entry: int) -> Tuple[int, ...]:
    """Ring atoms in bond order starting at `entry`, stepping first to the lower-index neighbour."""
    members = set(ring)
    walk = [entry]
    previous = None
    current = entry
    while len(walk) < _RING:
        step = min(k for k in target.neighbors(current) if k in members and k != previous and k not in walk)
        walk.append(step)
        previous, current = current, step
    return tuple(walk)


def diff_reaction(reaction: Reaction) -> PendingEditSet:
    """All edits turning `reaction.source` into `reaction.target`."""
    source, target, corr = reaction.source, reaction.target, reaction.correspondence
    if len(set(corr.values())) != len(corr):
        raise MappingError("two source atoms map onto the same target atom")
    pending = PendingEditSet()

    for s, t in corr.items():
        if _atom_needs_edit(source, target, s, t, corr):
            b = target.nodes[t]
            pending.atom_edits[s] = EditAtom(formal_charge=b.formal_charge, chiral_tag=b.chiral_tag,
                                             explicit_h_count=b.explicit_h_count, is_aromatic=b.is_aromatic)

    # bonds among source atoms
    inverse = {t: s for s, t in corr.items()}
    for (si, sj) in source.edges:
        if source.nodes[si].is_supernode or source.nodes[sj].is_supernode:
            continue
        if target.bond(corr[si], corr[sj]) is None:
            pending.bond_edits[(si, sj)] = EditBond()
        elif _bond_needs_edit(source, target, si, sj, corr):
            bond = target.bond(corr[si], corr[sj])
            pending.bond_edits[(si, sj)] = EditBond(bond.bond_type, bond.stereo)
    for (ti, tj), bond in target.edges.items():
        if ti in inverse and tj in inverse:
            si, sj = sorted((inverse[ti], inverse[tj]))
            if source.bond(si, sj) is None:
                pending.bond_edits[(si, sj)] = EditBond(bond.bond_type, bond.stereo)

    # target-only atoms
    target_only = set(range(target.num_atoms)) - set(inverse)
    if not target_only:
        return pending
    parents = _spanning_forest(target, sorted(inverse))
    unreachable = target_only - set(parents)
    if unreachable:
        raise UnreachableAtoms(unreachable)

    def ref(t: int) -> NodeRef:
        return inverse[t] if t in inverse else NewAtom(t)

    covered: Set[Tuple[int, int]] = set()
    collapsed: Set[int] = set()
    for ring in _benzene_rings(target, target_only):
        members = set(ring)
        entries = [t for t in ring if parents[t] not in members]
        if len(entries) != 1:
            continue
        entry = entries[0]
        anchor = parents[entry]
        if target.bond(anchor, entry).bond_type is not BondType.SINGLE or target.nodes[anchor].atomic_number != 6:
            pending.benzene_counterexamples += 1
            continue
        walk = _ring_walk(target, ring, entry)
        pending.additions.append(Addition(ref(anchor), AddBenzene(), walk))
        collapsed.update(ring)
        covered.add(tuple(sorted((anchor, entry))))
        covered.update(tuple(sorted((walk[k], walk[(k + 1) % _RING]))) for k in range(_RING))

    for child in sorted(target_only - collapsed):
        parent = parents[child]
        pending.additions.append(Addition(ref(parent), _addition_for(target, parent, child), (child,)))
        covered.add(tuple(sorted((parent, child))))

    for (ti, tj), bond in target.edges.items():
        if (ti, tj) in covered or (ti in inverse and tj in inverse):
            continue
        pending.bond_edits[ref_pair(ref(ti), ref(tj))] = EditBond(bond.bond_type, bond.stereo)

    return pending
