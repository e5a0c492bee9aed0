"""
SMILES reader.

Supported grammar: organic-subset and bracket atoms, aromatic lowercase atoms,
branches, ring closures (digits and %nn), dot-separated components, charges,
atom maps, @/@@ tetrahedral tags and / \\ double-bond markers. Isotopes are
read and dropped with a warning; wildcards and extended chirality classes are
rejected.

Usage:
    from chem.smiles_parser import parse_smiles

    graph = parse_smiles("[CH3:1][OH:2]")
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

from .exceptions import SmilesSyntaxError, UnsupportedFeatureError
from .molgraph import AtomNode, BondEdge, BondStereo, BondType, ChiralTag, MolGraph, pair
from .stereo import HYDROGEN, chiral_reference, reorder_chiral_tag, stereo_in_default_frame
from .valence import AROMATIC_BRACKET, AROMATIC_ORGANIC, NUMBER_BY_SYMBOL, ORGANIC_SUBSET, check_valence

logger = logging.getLogger(__name__)

_BOND_SYMBOLS = {
    '-': BondType.SINGLE,
    '=': BondType.DOUBLE,
    '#': BondType.TRIPLE,
    ':': BondType.AROMATIC,
    '/': BondType.SINGLE,
    '\\': BondType.SINGLE,
}

_RING_PENDING = -2  # placeholder in a written neighbour order until the ring closes


@dataclass
class _RingOpening:
    atom: int
    bond_symbol: Optional[str]
    position: int


@dataclass
class _ParseState:
    atoms: List[AtomNode] = field(default_factory=list)
    bonds: Dict[Tuple[int, int], BondType] = field(default_factory=dict)
    # (from, to, marker) as written for / and \ bonds
    directions: Dict[Tuple[int, int], Tuple[int, int, str]] = field(default_factory=dict)
    written_order: List[List[int]] = field(default_factory=list)
    written_chirality: Dict[int, ChiralTag] = field(default_factory=dict)


class SmilesParser:
    """Single-pass scanner; one instance per string."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.state = _ParseState()

    # ---- helpers ---------------------------------------------------------

    def _error(self, message: str, position: Optional[int] = None) -> SmilesSyntaxError:
        return SmilesSyntaxError(message, self.pos if position is None else position, self.text)

    def _peek(self, offset: int = 0) -> str:
        k = self.pos + offset
        return self.text[k] if k < len(self.text) else ""

    def _read_int(self) -> Optional[int]:
        start = self.pos
        while self._peek().isdigit():
            self.pos += 1
        return int(self.text[start:self.pos]) if self.pos > start else None

    # ---- atoms -----------------------------------------------------------

    def _add_atom(self, atom: AtomNode, chiral: ChiralTag) -> int:
        index = len(self.state.atoms)
        self.state.atoms.append(atom)
        self.state.written_order.append([])
        if chiral is not ChiralTag.NONE:
            self.state.written_chirality[index] = chiral
        return index

    def _read_organic(self) -> Tuple[AtomNode, bool, ChiralTag]:
        two = self.text[self.pos:self.pos + 2]
        if two in ("Cl", "Br"):
            self.pos += 2
            return AtomNode(ORGANIC_SUBSET[two]), False, ChiralTag.NONE
        char = self._peek()
        if char in ORGANIC_SUBSET:
            self.pos += 1
            return AtomNode(ORGANIC_SUBSET[char]), False, ChiralTag.NONE
        if char in AROMATIC_ORGANIC:
            self.pos += 1
            return AtomNode(AROMATIC_ORGANIC[char], is_aromatic=True), False, ChiralTag.NONE
        if char == '*':
            raise UnsupportedFeatureError(f"wildcard atom at position {self.pos} in '{self.text}'")
        raise self._error(f"unexpected character '{char}'")

    def _read_bracket(self) -> Tuple[AtomNode, bool, ChiralTag]:
        start = self.pos
        self.pos += 1  # '['
        isotope = self._read_int()
        if isotope is not None:
            logger.warning(f"Isotope {isotope} ignored at position {start} in '{self.text}'")

        if self._peek() == '*':
            raise UnsupportedFeatureError(f"wildcard atom at position {self.pos} in '{self.text}'")
        aromatic = False
        two = self.text[self.pos:self.pos + 2]
        one = self._peek()
        if two in NUMBER_BY_SYMBOL:
            symbol, atomic_number = two, NUMBER_BY_SYMBOL[two]
        elif two in AROMATIC_BRACKET:
            symbol, atomic_number, aromatic = two, AROMATIC_BRACKET[two], True
        elif one in NUMBER_BY_SYMBOL:
            symbol, atomic_number = one, NUMBER_BY_SYMBOL[one]
        elif one in AROMATIC_BRACKET:
            symbol, atomic_number, aromatic = one, AROMATIC_BRACKET[one], True
        else:
            raise self._error("unknown element in bracket atom")
        self.pos += len(symbol)

        chiral = ChiralTag.NONE
        if self._peek() == '@':
            if self._peek(1) == '@':
                chiral = ChiralTag.CW
                self.pos += 2
            else:
                chiral = ChiralTag.CCW
                self.pos += 1
            if self._peek().isalpha() and self._peek() in "TASO":
                raise UnsupportedFeatureError(f"extended chirality class at position {self.pos} in '{self.text}'")

        h_count = 0
        h_written = False
        if self._peek() == 'H':
            self.pos += 1
            h_written = True
            count = self._read_int()
            h_count = 1 if count is None else count

        charge = 0
        sign = self._peek()
        if sign and sign in "+-":
            unit = 1 if sign == '+' else -1
            self.pos += 1
            magnitude = self._read_int()
            if magnitude is None:
                magnitude = 1
                while self._peek() == sign:
                    magnitude += 1
                    self.pos += 1
            charge = unit * magnitude

        map_number = 0
        if self._peek() == ':':
            self.pos += 1
            value = self._read_int()
            if value is None:
                raise self._error("atom map without a number")
            map_number = value

        if self._peek() != ']':
            raise self._error("unterminated bracket atom", start)
        self.pos += 1
        atom = AtomNode(atomic_number=atomic_number, formal_charge=charge, explicit_h_count=h_count,
                        is_aromatic=aromatic, map_number=map_number)
        return atom, h_written and h_count > 0, chiral

    # ---- bonds -----------------------------------------------------------

    def _connect(self, a: int, b: int, symbol: Optional[str], position: int) -> None:
        key = pair(a, b)
        if a == b or key in self.state.bonds:
            raise self._error("duplicate bond or ring closure onto the same atom", position)
        if symbol is None:
            both_aromatic = self.state.atoms[a].is_aromatic and self.state.atoms[b].is_aromatic
            bond_type = BondType.AROMATIC if both_aromatic else BondType.SINGLE
        else:
            bond_type = _BOND_SYMBOLS[symbol]
        self.state.bonds[key] = bond_type
        if symbol in ('/', '\\') and key not in self.state.directions:
            self.state.directions[key] = (a, b, symbol)

    # ---- main loop -------------------------------------------------------

    def parse(self) -> MolGraph:
        text = self.text
        previous: Optional[int] = None
        branch_stack: List[int] = []
        rings: Dict[int, _RingOpening] = {}
        bond_symbol: Optional[str] = None
        bond_position = 0

        while self.pos < len(text):
            char = text[self.pos]

            if char in _BOND_SYMBOLS:
                if bond_symbol is not None:
                    raise self._error("two bond symbols in a row")
                if previous is None:
                    raise self._error("bond symbol without a preceding atom")
                bond_symbol, bond_position = char, self.pos
                self.pos += 1
                continue

            if char == '(':
                if previous is None or bond_symbol is not None:
                    raise self._error("branch opened without a preceding atom")
                branch_stack.append(previous)
                self.pos += 1
                continue

            if char == ')':
                if not branch_stack:
                    raise self._error("unmatched ')'")
                if bond_symbol is not None:
                    raise self._error("bond symbol at end of branch")
                previous = branch_stack.pop()
                self.pos += 1
                continue

            if char == '.':
                if bond_symbol is not None or previous is None:
                    raise self._error("misplaced '.'")
                if branch_stack:
                    raise self._error("'.' inside a branch")
                previous = None
                self.pos += 1
                continue

            if char.isdigit() or char == '%':
                if previous is None:
                    raise self._error("ring closure without an atom")
                position = self.pos
                if char == '%':
                    digits = text[self.pos + 1:self.pos + 3]
                    if len(digits) != 2 or not digits.isdigit():
                        raise self._error("'%' must be followed by two digits")
                    number = int(digits)
                    self.pos += 3
                else:
                    number = int(char)
                    self.pos += 1
                self._ring_bond(previous, number, bond_symbol, position, rings)
                bond_symbol = None
                continue

            # atom
            if char == '[':
                atom, h_written, chiral = self._read_bracket()
            else:
                atom, h_written, chiral = self._read_organic()
            index = self._add_atom(atom, chiral)
            if previous is not None:
                self._connect(previous, index, bond_symbol, bond_position)
                self.state.written_order[previous].append(index)
                self.state.written_order[index].append(previous)
            elif bond_symbol is not None:
                raise self._error("bond symbol without a preceding atom", bond_position)
            if h_written:
                self.state.written_order[index].append(HYDROGEN)
            bond_symbol = None
            previous = index

        if bond_symbol is not None:
            raise self._error("dangling bond symbol at end of input", bond_position)
        if branch_stack:
            raise self._error("unclosed branch")
        if rings:
            number, opening = next(iter(rings.items()))
            raise self._error(f"unclosed ring {number}", opening.position)
        return self._finish()

    def _ring_bond(self, atom: int, number: int, symbol: Optional[str], position: int,
                   rings: Dict[int, _RingOpening]) -> None:
        opening = rings.pop(number, None)
        if opening is None:
            rings[number] = _RingOpening(atom, symbol, position)
            self.state.written_order[atom].append(_RING_PENDING - number)
            return
        first, second = opening.bond_symbol, symbol
        if first and second and first != second and {first, second} != {'/', '\\'}:
            raise self._error(f"conflicting bond symbols on ring {number}", position)
        # a marker at the opening reads opening -> closing, at the closing closing -> opening
        if first is not None:
            self._connect(opening.atom, atom, first, opening.position)
        else:
            self._connect(atom, opening.atom, second, position)
        order = self.state.written_order[opening.atom]
        order[order.index(_RING_PENDING - number)] = atom
        self.state.written_order[atom].append(opening.atom)

    # ---- assembly --------------------------------------------------------

    def _finish(self) -> MolGraph:
        state = self.state
        edges = {key: BondEdge(key[0], key[1], bond_type) for key, bond_type in state.bonds.items()}
        graph = MolGraph(tuple(state.atoms), edges)

        for index, tag in state.written_chirality.items():
            written = list(state.written_order[index])
            has_h = graph.total_h(index) > 0
            if has_h and HYDROGEN not in written:
                written.insert(1 if written else 0, HYDROGEN)
            elif not has_h and HYDROGEN in written:
                written.remove(HYDROGEN)
            stored = reorder_chiral_tag(tag, written, chiral_reference(graph, index))
            graph = graph.with_atom(index, replace(graph.nodes[index], chiral_tag=stored))

        for (i, j), bond in list(graph.edges.items()):
            if bond.bond_type is not BondType.DOUBLE:
                continue
            left = self._directed_neighbor(graph, i, j)
            right = self._directed_neighbor(graph, j, i)
            if left is None or right is None:
                continue
            k, toward_i = left
            m, toward_m = right
            # toward_i = direction k -> i, toward_m = direction j -> m
            label = BondStereo.E if toward_i == toward_m else BondStereo.Z
            stored = stereo_in_default_frame(graph, i, j, label, k, m)
            graph = graph.with_bond(replace(bond, stereo=stored))

        check_valence(graph)
        return graph

    def _directed_neighbor(self, graph: MolGraph, atom: int, partner: int) -> Optional[Tuple[int, int]]:
        """First neighbour with a / or \\ bond, plus the sign of that bond read towards the double bond
        (for the first end) or away from it (second end); sign convention: '/' written a->b is +1."""
        for k in graph.neighbors(atom):
            if k == partner:
                continue
            written = self.state.directions.get(pair(atom, k))
            if written is None:
                continue
            a, b, marker = written
            sign = 1 if marker == '/' else -1
            if atom < partner:
                # first end: direction k -> atom
                return k, sign if (a, b) == (k, atom) else -sign
            # second end: direction atom -> k
            return k, sign if (a, b) == (atom, k) else -sign
        return None


def parse_smiles(text: str) -> MolGraph:
    """Parse a SMILES string into a MolGraph without supernode."""
    return SmilesParser(text.strip()).parse()
