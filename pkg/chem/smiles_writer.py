"""
SMILES writer and canonicalizer.

Canonical output ranks atoms by iterative neighbourhood refinement: initial
invariants (element, aromaticity, charge, degree, hydrogens, stereo flag and
optionally the map number) are refined with sorted neighbour ranks until the
partition stops splitting. Remaining ties are broken one atom at a time, and
refinement runs again after each break. Plain graphs take the lowest index at
every tie. In graphs with stereo, symmetric choices can flip @/@@ or the bond
markers, so every member of each tied class is tried and the smallest written
string wins. Components are written independently and joined in lexicographic
order.

Usage:
    from chem.smiles_writer import write_smiles, canonical_ranks

    write_smiles(parse_smiles("OCC"), canonical=True)      # 'CCO'
    canonical_ranks(parse_smiles("CC(=O)O"))                # [0, 1, 2, 3]
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from .molgraph import BondStereo, BondType, ChiralTag, MolGraph, BOND_TYPE_ORDER, pair
from .stereo import HYDROGEN, chiral_reference, reorder_chiral_tag, stereo_relative_to
from .valence import (AROMATIC_ORGANIC, AROMATIC_SYMBOL_BY_NUMBER, ORGANIC_SUBSET, SYMBOL_BY_NUMBER,
                      check_valence, implicit_h_count)

logger = logging.getLogger(__name__)

# leaf orders tried when stereo atoms sit in symmetric positions
MAX_TIE_BREAK_ORDERS = 512


# ---- ranking -------------------------------------------------------------

def _dense_ranks(keys: Sequence) -> List[int]:
    ordered = sorted(set(keys))
    lookup = {key: rank for rank, key in enumerate(ordered)}
    return [lookup[key] for key in keys]


def _initial_invariants(graph: MolGraph, keep_maps: bool) -> List[tuple]:
    invariants = []
    for i, atom in enumerate(graph.nodes):
        invariants.append((
            atom.atomic_number,
            int(atom.is_aromatic),
            atom.formal_charge,
            graph.degree(i),
            graph.total_h(i),
            int(atom.chiral_tag is not ChiralTag.NONE),
            atom.map_number if keep_maps else 0,
        ))
    return invariants


def _refine(graph: MolGraph, ranks: List[int]) -> List[int]:
    bond_codes = {key: (BOND_TYPE_ORDER[b.bond_type], int(b.stereo is not BondStereo.NONE))
                  for key, b in graph.edges.items()}
    n_classes = len(set(ranks))
    while True:
        signatures = []
        for i in range(graph.num_nodes):
            around = sorted((bond_codes[pair(i, j)], ranks[j]) for j in graph.neighbors(i))
            signatures.append((ranks[i], tuple(around)))
        refined = _dense_ranks(signatures)
        n_refined = len(set(refined))
        if n_refined == n_classes:
            return refined
        ranks, n_classes = refined, n_refined


def _first_tie(ranks: List[int]) -> Optional[int]:
    counts = Counter(ranks)
    tied = [rank for rank, count in counts.items() if count > 1]
    return min(tied) if tied else None


def _split(graph: MolGraph, ranks: List[int], tied: int, chosen: int) -> List[int]:
    # split the tied class, chosen atom first, then let the split propagate
    ranks = [2 * r + (0 if i == chosen or r != tied else 1) for i, r in enumerate(ranks)]
    return _refine(graph, _dense_ranks(ranks))


def _has_stereo(graph: MolGraph) -> bool:
    return (any(atom.chiral_tag is not ChiralTag.NONE for atom in graph.nodes)
            or any(bond.stereo is not BondStereo.NONE for bond in graph.edges.values()))


def atom_ranks(graph: MolGraph, keep_maps: bool = False) -> List[int]:
    """Total order on atoms; remaining ties go to the lowest index."""
    if graph.num_nodes == 0:
        return []
    ranks = _refine(graph, _dense_ranks(_initial_invariants(graph, keep_maps)))
    while (tied := _first_tie(ranks)) is not None:
        ranks = _split(graph, ranks, tied, ranks.index(tied))
    return ranks


def tie_break_orders(graph: MolGraph, keep_maps: bool = False,
                     limit: int = MAX_TIE_BREAK_ORDERS) -> Iterator[List[int]]:
    """Every total order reachable by splitting ties, each tied atom tried in turn."""
    if graph.num_nodes == 0:
        yield []
        return
    stack = [_refine(graph, _dense_ranks(_initial_invariants(graph, keep_maps)))]
    produced = 0
    while stack:
        ranks = stack.pop()
        tied = _first_tie(ranks)
        if tied is None:
            yield ranks
            produced += 1
            if produced >= limit:
                if stack:
                    logger.debug(f"Tie-break search stopped after {limit} orders")
                return
            continue
        members = [i for i, r in enumerate(ranks) if r == tied]
        stack.extend(_split(graph, ranks, tied, chosen) for chosen in reversed(members))


# ---- traversal -----------------------------------------------------------

@dataclass
class _Traversal:
    order: List[int] = field(default_factory=list)
    parent: Dict[int, Optional[int]] = field(default_factory=dict)
    children: Dict[int, List[int]] = field(default_factory=dict)
    # (opening, closing) in the order the closures were discovered
    closures: List[Tuple[int, int]] = field(default_factory=list)


def _traverse(graph: MolGraph, start: int, priority: Callable[[int], int]) -> _Traversal:
    walk = _Traversal()
    closed = set()
    visited = set()
    # iterative DFS that mirrors the recursive visit order
    iterators: Dict[int, List[int]] = {}
    walk.order.append(start)
    walk.parent[start] = None
    walk.children[start] = []
    visited.add(start)
    iterators[start] = sorted(graph.neighbors(start), key=priority)
    path = [start]
    while path:
        atom = path[-1]
        pending = iterators[atom]
        if not pending:
            path.pop()
            continue
        nxt = pending.pop(0)
        if nxt == walk.parent[atom]:
            continue
        if nxt in visited:
            key = pair(atom, nxt)
            if key not in closed:
                closed.add(key)
                walk.closures.append((nxt, atom))
            continue
        visited.add(nxt)
        walk.order.append(nxt)
        walk.parent[nxt] = atom
        walk.children[nxt] = []
        walk.children[atom].append(nxt)
        iterators[nxt] = sorted(graph.neighbors(nxt), key=priority)
        path.append(nxt)
    return walk


# ---- emission ------------------------------------------------------------

class SmilesWriter:
    """Writes one graph; component strings and atom output order are kept for ranking."""

    def __init__(self, graph: MolGraph, canonical: bool = True, keep_maps: bool = True,
                 ranks: Optional[List[int]] = None):
        self.graph = graph
        self.canonical = canonical
        self.keep_maps = keep_maps
        if ranks is None:
            ranks = atom_ranks(graph, keep_maps) if canonical else list(range(graph.num_nodes))
        self.ranks = ranks
        self.output_order: List[int] = []

    def write(self) -> str:
        graph = self.graph
        priority = self.ranks.__getitem__
        pieces: List[Tuple[str, List[int]]] = []
        for component in graph.components():
            start = min(component, key=priority)
            walk = _traverse(graph, start, priority)
            pieces.append((self._emit(walk), walk.order))
        if self.canonical:
            pieces.sort(key=lambda piece: piece[0])
        self.output_order = [atom for _, order in pieces for atom in order]
        return ".".join(text for text, _ in pieces)

    # ---- tokens ----------------------------------------------------------

    def _atom_token(self, i: int, written: List[int]) -> str:
        graph = self.graph
        atom = graph.nodes[i]
        symbol = SYMBOL_BY_NUMBER.get(atom.atomic_number, "*")
        if atom.is_aromatic and atom.atomic_number in AROMATIC_SYMBOL_BY_NUMBER:
            symbol = AROMATIC_SYMBOL_BY_NUMBER[atom.atomic_number]
        total_h = graph.total_h(i)
        map_number = atom.map_number if self.keep_maps else 0
        organic = (symbol in ORGANIC_SUBSET or symbol in AROMATIC_ORGANIC)
        bare_h = implicit_h_count(graph, i, explicit=0)
        if (organic and atom.formal_charge == 0 and atom.chiral_tag is ChiralTag.NONE
                and map_number == 0 and total_h == bare_h):
            return symbol

        token = "[" + symbol
        if atom.chiral_tag is not ChiralTag.NONE:
            tag = reorder_chiral_tag(atom.chiral_tag, chiral_reference(graph, i), written)
            token += tag.value
        if total_h:
            token += "H" if total_h == 1 else f"H{total_h}"
        if atom.formal_charge:
            sign = "+" if atom.formal_charge > 0 else "-"
            token += sign if abs(atom.formal_charge) == 1 else f"{sign}{abs(atom.formal_charge)}"
        if map_number:
            token += f":{map_number}"
        return token + "]"

    def _bond_token(self, a: int, b: int, directions: Dict[Tuple[int, int], int],
                    oriented: Dict[Tuple[int, int], Tuple[int, int]]) -> str:
        graph = self.graph
        bond = graph.bond(a, b)
        key = pair(a, b)
        if key in directions:
            sign = directions[key] if oriented[key] == (a, b) else -directions[key]
            return "/" if sign > 0 else "\\"
        both_aromatic = graph.nodes[a].is_aromatic and graph.nodes[b].is_aromatic
        if bond.bond_type is BondType.SINGLE:
            return "-" if both_aromatic else ""
        if bond.bond_type is BondType.DOUBLE:
            return "="
        if bond.bond_type is BondType.TRIPLE:
            return "#"
        if bond.bond_type is BondType.AROMATIC:
            return "" if both_aromatic else ":"
        return ""

    # ---- double-bond markers --------------------------------------------

    def _assign_directions(self, walk: _Traversal, oriented: Dict[Tuple[int, int], Tuple[int, int]]) -> Dict[Tuple[int, int], int]:
        """Pick / and \\ signs (in written orientation) that reproduce every stored E/Z label."""
        graph = self.graph
        position = {atom: k for k, atom in enumerate(walk.order)}
        directions: Dict[Tuple[int, int], int] = {}

        def sign_of(x: int, y: int) -> Optional[int]:
            key = pair(x, y)
            if key not in directions:
                return None
            return directions[key] if oriented[key] == (x, y) else -directions[key]

        def set_sign(x: int, y: int, sign: int) -> None:
            key = pair(x, y)
            directions[key] = sign if oriented[key] == (x, y) else -sign

        stereo_bonds = [b for b in graph.edges.values()
                        if b.stereo is not BondStereo.NONE and b.bond_type is BondType.DOUBLE
                        and b.i in position and b.j in position]

        def substituents(atom: int, partner: int) -> List[int]:
            # bonds that already carry a marker come first so the reader sees a consistent one
            found = [k for k in graph.neighbors(atom)
                     if k != partner and graph.bond(atom, k).bond_type is BondType.SINGLE]
            return sorted(found, key=lambda k: (pair(atom, k) not in directions, position[k]))

        stereo_bonds.sort(key=lambda b: min(position[b.i], position[b.j]))
        for bond in stereo_bonds:
            first, second = (bond.i, bond.j) if position[bond.i] < position[bond.j] else (bond.j, bond.i)
            left = substituents(first, second)
            right = substituents(second, first)
            placed = False
            for k in left:
                for m in right:
                    # label seen from k (on first) and m (on second)
                    on_i, on_j = (k, m) if first == bond.i else (m, k)
                    label = stereo_relative_to(graph, bond, on_i, on_j)
                    toward = sign_of(k, first)
                    away = sign_of(second, m)
                    if toward is None:
                        toward = away if away is not None and label is BondStereo.E else (
                            -away if away is not None else 1)
                    wanted_away = toward if label is BondStereo.E else -toward
                    if away is not None and away != wanted_away:
                        continue
                    set_sign(k, first, toward)
                    set_sign(second, m, wanted_away)
                    placed = True
                    break
                if placed:
                    break
            if not placed and left and right:
                logger.warning(f"Could not place E/Z markers for bond {bond.endpoints}; stereo dropped in output")
        return directions

    def _emit(self, walk: _Traversal) -> str:
        graph = self.graph
        priority = self.ranks.__getitem__

        # written orientation of every bond in this component
        oriented: Dict[Tuple[int, int], Tuple[int, int]] = {}
        for atom in walk.order:
            parent = walk.parent[atom]
            if parent is not None:
                oriented[pair(parent, atom)] = (parent, atom)
        for opening, closing in walk.closures:
            oriented[pair(opening, closing)] = (opening, closing)
        directions = self._assign_directions(walk, oriented)

        openings: Dict[int, List[int]] = {a: [] for a in walk.order}
        closings: Dict[int, List[int]] = {a: [] for a in walk.order}
        for opening, closing in walk.closures:
            openings[opening].append(closing)
            closings[closing].append(opening)
        position = {atom: k for k, atom in enumerate(walk.order)}
        for atom in walk.order:
            openings[atom].sort(key=priority)
            closings[atom].sort(key=position.__getitem__)

        digits_in_use: Dict[Tuple[int, int], int] = {}
        free: List[int] = []
        next_digit = [1]

        def take_digit() -> int:
            if free:
                free.sort()
                return free.pop(0)
            digit = next_digit[0]
            next_digit[0] += 1
            return digit

        def digit_text(digit: int) -> str:
            return str(digit) if digit < 10 else f"%{digit:02d}"

        out: List[str] = []
        # explicit stack of ("atom" | "open" | "close", atom)
        stack: List[Tuple[str, int]] = [("atom", walk.order[0])]
        while stack:
            kind, atom = stack.pop()
            if kind == "close":
                out.append(")")
                continue
            if kind == "open":
                out.append("(")
                continue
            parent = walk.parent[atom]
            if parent is not None:
                out.append(self._bond_token(parent, atom, directions, oriented))

            written: List[int] = [] if parent is None else [parent]
            if graph.total_h(atom) > 0:
                written.append(HYDROGEN)
            ring_text: List[str] = []
            for opening in closings[atom]:
                digit = digits_in_use.pop(pair(opening, atom))
                ring_text.append(digit_text(digit))
                free.append(digit)
                written.append(opening)
            for closing in openings[atom]:
                digit = take_digit()
                digits_in_use[pair(atom, closing)] = digit
                ring_text.append(self._bond_token(atom, closing, directions, oriented) + digit_text(digit))
                written.append(closing)
            children = walk.children[atom]
            written.extend(children)

            out.append(self._atom_token(atom, written))
            out.extend(ring_text)

            # last child continues the chain, the others become branches
            for index in range(len(children) - 1, -1, -1):
                child = children[index]
                if index == len(children) - 1:
                    stack.append(("atom", child))
                else:
                    stack.append(("close", child))
                    stack.append(("atom", child))
                    stack.append(("open", child))
        return "".join(out)


def _canonical_writer(graph: MolGraph, keep_maps: bool) -> Tuple[str, SmilesWriter]:
    if not _has_stereo(graph):
        writer = SmilesWriter(graph, canonical=True, keep_maps=keep_maps)
        return writer.write(), writer
    best: Optional[Tuple[str, SmilesWriter]] = None
    for ranks in tie_break_orders(graph, keep_maps):
        writer = SmilesWriter(graph, canonical=True, keep_maps=keep_maps, ranks=ranks)
        text = writer.write()
        if best is None or text < best[0]:
            best = (text, writer)
    return best


def write_smiles(graph: MolGraph, canonical: bool = True, keep_maps: bool = True) -> str:
    """Write a graph (supernode ignored) as SMILES; canonical output is permutation invariant."""
    graph = graph.without_supernode()
    check_valence(graph)
    if canonical:
        return _canonical_writer(graph, keep_maps)[0]
    return SmilesWriter(graph, canonical=False, keep_maps=keep_maps).write()


def canonical_smiles(graph: MolGraph, keep_maps: bool = False) -> str:
    return write_smiles(graph, canonical=True, keep_maps=keep_maps)


def canonical_ranks(graph: MolGraph, keep_maps: bool = False) -> List[int]:
    """Position of every atom in the canonical SMILES output order."""
    graph = graph.without_supernode()
    check_valence(graph)
    _, writer = _canonical_writer(graph, keep_maps)
    ranks = [0] * graph.num_nodes
    for position, atom in enumerate(writer.output_order):
        ranks[atom] = position
    return ranks
