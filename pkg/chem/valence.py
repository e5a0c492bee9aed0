"""
Element tables and the valence model.

Hydrogen bookkeeping follows two rules:
    - explicit_h_count is stored on the atom (bracket H in SMILES).
    - implicit hydrogens fill the lowest allowed valence of organic-subset
      elements; every other element gets none.

Usage:
    from chem.valence import total_h_count, check_valence

    h = total_h_count(graph, 0)
    check_valence(graph)  # raises ValenceError
"""

import logging
from typing import Dict, Optional, Tuple

from .exceptions import ValenceError

logger = logging.getLogger(__name__)


_SYMBOLS = (
    "H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca Sc Ti V Cr Mn Fe Co Ni Cu Zn Ga Ge As Se Br Kr "
    "Rb Sr Y Zr Nb Mo Tc Ru Rh Pd Ag Cd In Sn Sb Te I Xe Cs Ba La Ce Pr Nd Pm Sm Eu Gd Tb Dy Ho Er Tm Yb "
    "Lu Hf Ta W Re Os Ir Pt Au Hg Tl Pb Bi Po At Rn Fr Ra Ac Th Pa U Np Pu Am Cm Bk Cf Es Fm Md No Lr"
).split()

SYMBOL_BY_NUMBER: Dict[int, str] = {z: s for z, s in enumerate(_SYMBOLS, start=1)}
NUMBER_BY_SYMBOL: Dict[str, int] = {s: z for z, s in SYMBOL_BY_NUMBER.items()}

# Atoms that may appear outside brackets
ORGANIC_SUBSET = {"B": 5, "C": 6, "N": 7, "O": 8, "P": 15, "S": 16, "F": 9, "Cl": 17, "Br": 35, "I": 53}
AROMATIC_ORGANIC = {"b": 5, "c": 6, "n": 7, "o": 8, "p": 15, "s": 16}
# Lowercase forms accepted inside brackets
AROMATIC_BRACKET = {"b": 5, "c": 6, "n": 7, "o": 8, "p": 15, "s": 16, "se": 34, "as": 33, "te": 52}
AROMATIC_SYMBOL_BY_NUMBER = {z: s for s, z in AROMATIC_BRACKET.items()}

# Allowed valences of neutral atoms. Elements missing here (transition metals,
# lanthanides, ...) are not checked.
ALLOWED_VALENCES: Dict[int, Tuple[int, ...]] = {
    1: (1,), 2: (0,), 3: (1,), 4: (2,), 5: (3,), 6: (4,), 7: (3,), 8: (2,), 9: (1,), 10: (0,),
    11: (1,), 12: (2,), 13: (3,), 14: (4,), 15: (3, 5), 16: (2, 4, 6), 17: (1,), 18: (0,),
    19: (1,), 20: (2,), 30: (2,), 31: (3,), 32: (4,), 33: (3, 5), 34: (2, 4, 6), 35: (1,), 36: (0,),
    37: (1,), 38: (2,), 48: (2,), 49: (3,), 50: (2, 4), 51: (3, 5), 52: (2, 4, 6), 53: (1, 3, 5), 54: (0,),
    55: (1,), 56: (2,),
}

# p-block elements whose charged forms behave like their isoelectronic neighbour
_PBLOCK = {5, 6, 7, 8, 9, 13, 14, 15, 16, 17, 31, 32, 33, 34, 35, 49, 50, 51, 52, 53}
_PERIODS = ((3, 10), (11, 18), (19, 36), (37, 54), (55, 86))

BOND_ORDERS = {"single": 1.0, "double": 2.0, "triple": 3.0, "aromatic": 1.5}


def _period(z: int) -> Optional[Tuple[int, int]]:
    for lo, hi in _PERIODS:
        if lo <= z <= hi:
            return lo, hi
    return None


def allowed_valences(atomic_number: int, formal_charge: int = 0) -> Optional[Tuple[int, ...]]:
    """Valences allowed for an element at a given charge, None when unchecked."""
    base = ALLOWED_VALENCES.get(atomic_number)
    if base is None or formal_charge == 0:
        return base
    if atomic_number in _PBLOCK:
        period = _period(atomic_number)
        shifted = atomic_number - formal_charge
        if period and period[0] <= shifted <= period[1] and shifted in ALLOWED_VALENCES:
            return ALLOWED_VALENCES[shifted]
        return None
    # metals lose one bonding site per unit of charge
    return tuple(sorted({max(0, v - abs(formal_charge)) for v in base}))


def bond_order_sum(graph, index: int) -> Tuple[float, int]:
    """Sum of non-aromatic bond orders and the number of aromatic bonds at an atom."""
    order = 0.0
    n_aromatic = 0
    for j in graph.neighbors(index):
        bond = graph.bond(index, j)
        name = bond.bond_type.value
        if name == "aromatic":
            n_aromatic += 1
        elif name in BOND_ORDERS:
            order += BOND_ORDERS[name]
    return order, n_aromatic


def implicit_h_count(graph, index: int, explicit: Optional[int] = None) -> int:
    """Hydrogens completing the lowest allowed valence; `explicit` overrides the stored count."""
    atom = graph.nodes[index]
    explicit = atom.explicit_h_count if explicit is None else explicit
    if atom.is_supernode or SYMBOL_BY_NUMBER.get(atom.atomic_number) not in ORGANIC_SUBSET:
        return 0
    valences = allowed_valences(atom.atomic_number, atom.formal_charge)
    if not valences:
        return 0
    order, n_aromatic = bond_order_sum(graph, index)
    if atom.is_aromatic:
        # one ring bond is double in any Kekule form
        used = explicit + order + n_aromatic + 1
        return max(0, int(min(valences) - used))
    used = explicit + order + n_aromatic
    for valence in valences:
        if valence >= used:
            return int(valence - used)
    return 0


def total_h_count(graph, index: int) -> int:
    return graph.nodes[index].explicit_h_count + implicit_h_count(graph, index)


def valence_violation(graph, index: int) -> Optional[str]:
    atom = graph.nodes[index]
    if atom.is_supernode:
        return None
    valences = allowed_valences(atom.atomic_number, atom.formal_charge)
    if valences is None:
        return None
    order, n_aromatic = bond_order_sum(graph, index)
    used = atom.explicit_h_count + order + n_aromatic
    if used > max(valences):
        symbol = SYMBOL_BY_NUMBER.get(atom.atomic_number, "?")
        return f"atom {index} ({symbol}, charge {atom.formal_charge}) has valence {used:g} > {max(valences)}"
    return None


def check_valence(graph) -> None:
    """Raise ValenceError naming the first over-bonded atom."""
    for index in range(graph.num_nodes):
        problem = valence_violation(graph, index)
        if problem:
            raise ValenceError(problem)


def is_valence_ok(graph) -> bool:
    return all(valence_violation(graph, i) is None for i in range(graph.num_nodes))
