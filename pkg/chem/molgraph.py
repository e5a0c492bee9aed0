"""
Molecular graph data model.

A MolGraph is an immutable value: every edit returns a new graph. Hydrogens
are never nodes; their count lives on AtomNode.explicit_h_count plus the
implicit completion computed in chem.valence. When present, the supernode is
always the last node and is bonded to every atom.
"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from .exceptions import AlreadyPresent
from .valence import SYMBOL_BY_NUMBER, total_h_count

logger = logging.getLogger(__name__)


class ChiralTag(Enum):
    NONE = "none"
    CW = "@@"
    CCW = "@"

    def flipped(self) -> 'ChiralTag':
        if self is ChiralTag.CW:
            return ChiralTag.CCW
        if self is ChiralTag.CCW:
            return ChiralTag.CW
        return self


class BondType(Enum):
    SUPERNODE = "supernode"
    SELF = "self"
    SINGLE = "single"
    DOUBLE = "double"
    TRIPLE = "triple"
    AROMATIC = "aromatic"

    @property
    def is_chemical(self) -> bool:
        return self not in (BondType.SUPERNODE, BondType.SELF)


class BondStereo(Enum):
    NONE = "none"
    Z = "Z"
    E = "E"

    def flipped(self) -> 'BondStereo':
        if self is BondStereo.Z:
            return BondStereo.E
        if self is BondStereo.E:
            return BondStereo.Z
        return self


# Stable orderings used by vocabulary sorting and feature value lists
CHIRAL_ORDER = {ChiralTag.NONE: 0, ChiralTag.CCW: 1, ChiralTag.CW: 2}
BOND_TYPE_ORDER = {t: k for k, t in enumerate(BondType)}
STEREO_ORDER = {BondStereo.NONE: 0, BondStereo.Z: 1, BondStereo.E: 2}


@dataclass(frozen=True)
class AtomNode:
    """One heavy atom (or the supernode)."""
    atomic_number: int
    formal_charge: int = 0
    chiral_tag: ChiralTag = ChiralTag.NONE
    explicit_h_count: int = 0
    is_aromatic: bool = False
    map_number: int = 0        # 0 = unmapped
    is_supernode: bool = False
    is_edited: bool = False
    is_reactant: bool = False  # forward "separated" inputs only

    @classmethod
    def supernode(cls) -> 'AtomNode':
        return cls(atomic_number=0, is_supernode=True)

    @property
    def symbol(self) -> str:
        return "*" if self.is_supernode else SYMBOL_BY_NUMBER.get(self.atomic_number, "?")

    @property
    def chemistry(self) -> Tuple[int, int, ChiralTag, int, bool]:
        """Properties an EditAtom action overwrites, plus the element."""
        return (self.atomic_number, self.formal_charge, self.chiral_tag, self.explicit_h_count, self.is_aromatic)


@dataclass(frozen=True)
class BondEdge:
    i: int
    j: int
    bond_type: BondType = BondType.SINGLE
    stereo: BondStereo = BondStereo.NONE
    is_edited: bool = False

    def __post_init__(self):
        if self.i >= self.j:
            raise ValueError(f"bond endpoints must satisfy i < j, got ({self.i}, {self.j})")

    @property
    def endpoints(self) -> Tuple[int, int]:
        return (self.i, self.j)

    def other(self, k: int) -> int:
        return self.j if k == self.i else self.i


def pair(i: int, j: int) -> Tuple[int, int]:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class MolGraph:
    nodes: Tuple[AtomNode, ...] = ()
    edges: Dict[Tuple[int, int], BondEdge] = field(default_factory=dict)

    # ---- structure -------------------------------------------------------

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def has_supernode(self) -> bool:
        return bool(self.nodes) and self.nodes[-1].is_supernode

    @property
    def num_atoms(self) -> int:
        return self.num_nodes - 1 if self.has_supernode else self.num_nodes

    @property
    def supernode_index(self) -> Optional[int]:
        return self.num_nodes - 1 if self.has_supernode else None

    @cached_property
    def _adjacency(self) -> List[List[int]]:
        adjacency: List[List[int]] = [[] for _ in self.nodes]
        for i, j in self.edges:
            adjacency[i].append(j)
            adjacency[j].append(i)
        for row in adjacency:
            row.sort()
        return adjacency

    def neighbors(self, i: int) -> List[int]:
        """Chemical neighbours of atom i, ascending; supernode links excluded."""
        if self.has_supernode:
            s = self.num_nodes - 1
            return [j for j in self._adjacency[i] if j != s]
        return list(self._adjacency[i])

    def all_neighbors(self, i: int) -> List[int]:
        return list(self._adjacency[i])

    def degree(self, i: int) -> int:
        return len(self.neighbors(i))

    def bond(self, i: int, j: int) -> Optional[BondEdge]:
        return self.edges.get(pair(i, j))

    def chemical_bonds(self) -> List[BondEdge]:
        return [b for b in self.edges.values() if b.bond_type.is_chemical]

    def total_h(self, i: int) -> int:
        return total_h_count(self, i)

    def map_index(self) -> Dict[int, int]:
        """map_number -> node index for mapped atoms."""
        return {a.map_number: k for k, a in enumerate(self.nodes) if a.map_number}

    # ---- copy-and-edit ---------------------------------------------------

    def with_atom(self, i: int, atom: AtomNode) -> 'MolGraph':
        nodes = list(self.nodes)
        nodes[i] = atom
        return MolGraph(tuple(nodes), dict(self.edges))

    def with_bond(self, bond: BondEdge) -> 'MolGraph':
        edges = dict(self.edges)
        edges[bond.endpoints] = bond
        return MolGraph(self.nodes, edges)

    def without_bond(self, i: int, j: int) -> 'MolGraph':
        edges = dict(self.edges)
        edges.pop(pair(i, j), None)
        return MolGraph(self.nodes, edges)

    def with_new_atom(self, atom: AtomNode) -> Tuple['MolGraph', int]:
        """Append an atom; with a supernode present the atom goes before it and gets wired to it."""
        if not self.has_supernode:
            return MolGraph(self.nodes + (atom,), dict(self.edges)), self.num_nodes
        index = self.num_nodes - 1
        supernode = index + 1
        edges: Dict[Tuple[int, int], BondEdge] = {}
        for (i, j), bond in self.edges.items():
            if j == index:  # old supernode position
                edges[(i, supernode)] = BondEdge(i, supernode, BondType.SUPERNODE)
            else:
                edges[(i, j)] = bond
        edges[(index, supernode)] = BondEdge(index, supernode, BondType.SUPERNODE)
        nodes = self.nodes[:-1] + (atom, self.nodes[-1])
        return MolGraph(nodes, edges), index

    def add_supernode(self) -> 'MolGraph':
        if self.has_supernode:
            raise AlreadyPresent("graph already has a supernode")
        s = self.num_nodes
        edges = dict(self.edges)
        for i in range(s):
            edges[(i, s)] = BondEdge(i, s, BondType.SUPERNODE)
        return MolGraph(self.nodes + (AtomNode.supernode(),), edges)

    def without_supernode(self) -> 'MolGraph':
        if not self.has_supernode:
            return self
        s = self.num_nodes - 1
        edges = {k: b for k, b in self.edges.items() if s not in k}
        return MolGraph(self.nodes[:-1], edges)

    def strip_maps(self) -> 'MolGraph':
        return MolGraph(tuple(replace(a, map_number=0) for a in self.nodes), dict(self.edges))

    def subgraph(self, indices: Iterable[int]) -> 'MolGraph':
        """Induced subgraph with order-preserving renumbering."""
        keep = sorted(set(indices))
        renumber = {old: new for new, old in enumerate(keep)}
        edges = {}
        for (i, j), bond in self.edges.items():
            if i in renumber and j in renumber:
                edges[(renumber[i], renumber[j])] = replace(bond, i=renumber[i], j=renumber[j])
        return MolGraph(tuple(self.nodes[k] for k in keep), edges)

    @staticmethod
    def disjoint_union(graphs: Sequence['MolGraph']) -> 'MolGraph':
        nodes: List[AtomNode] = []
        edges: Dict[Tuple[int, int], BondEdge] = {}
        for graph in graphs:
            offset = len(nodes)
            nodes.extend(graph.nodes)
            for (i, j), bond in graph.edges.items():
                edges[(i + offset, j + offset)] = replace(bond, i=i + offset, j=j + offset)
        return MolGraph(tuple(nodes), edges)

    # ---- views -----------------------------------------------------------

    def to_networkx(self, include_supernode: bool = False) -> nx.Graph:
        graph = nx.Graph()
        limit = self.num_nodes if include_supernode else self.num_atoms
        graph.add_nodes_from(range(limit))
        for (i, j), bond in self.edges.items():
            if i < limit and j < limit and (include_supernode or bond.bond_type.is_chemical):
                graph.add_edge(i, j, bond_type=bond.bond_type)
        return graph

    def components(self) -> List[List[int]]:
        """Connected components of the atom graph, each ascending, ordered by first atom."""
        parts = [sorted(c) for c in nx.connected_components(self.to_networkx())]
        return sorted(parts, key=lambda c: c[0])

    def to_record(self) -> dict:
        """Compact JSON-friendly form used by the sample archive."""
        atoms = [[a.atomic_number, a.formal_charge, a.chiral_tag.value, a.explicit_h_count,
                  int(a.is_aromatic), a.map_number, int(a.is_reactant)]
                 for a in self.nodes if not a.is_supernode]
        bonds = [[b.i, b.j, b.bond_type.value, b.stereo.value] for b in sorted(
            self.chemical_bonds(), key=lambda b: b.endpoints)]
        return {'atoms': atoms, 'bonds': bonds}

    @classmethod
    def from_record(cls, record: dict) -> 'MolGraph':
        nodes = tuple(
            AtomNode(atomic_number=z, formal_charge=q, chiral_tag=ChiralTag(c), explicit_h_count=h,
                     is_aromatic=bool(ar), map_number=m, is_reactant=bool(r))
            for z, q, c, h, ar, m, r in record['atoms'])
        edges = {(i, j): BondEdge(i, j, BondType(t), BondStereo(s)) for i, j, t, s in record['bonds']}
        return cls(nodes, edges)

    def __str__(self) -> str:
        return f"MolGraph({self.num_atoms} atoms, {len(self.chemical_bonds())} bonds" + \
            (", supernode)" if self.has_supernode else ")")
