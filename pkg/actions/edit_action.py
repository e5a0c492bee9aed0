"""
Graph edit actions and their targets.

Every action is a frozen record; `kind` and `is_bond_action` are class
attributes. Text form (used by the vocabulary file) is the kind name followed
by sorted key=value parameters, e.g.

    EditBond bond_type=delete stereo=none
    AddAtom atomic_number=8 bond_stereo=none bond_type=single chiral_tag=none explicit_h_count=0 formal_charge=0 is_aromatic=0
"""

from dataclasses import dataclass, fields
from enum import Enum
from typing import ClassVar, Dict, Optional, Tuple, Union

from chem.molgraph import (BOND_TYPE_ORDER, CHIRAL_ORDER, STEREO_ORDER, BondStereo, BondType, ChiralTag)


class ActionKind(Enum):
    EDIT_ATOM = "EditAtom"
    EDIT_BOND = "EditBond"
    ADD_ATOM = "AddAtom"
    ADD_BENZENE = "AddBenzene"
    STOP = "Stop"


KIND_ORDER = {kind: k for k, kind in enumerate(ActionKind)}
DELETE = "delete"


def _format(value) -> str:
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, bool):
        return str(int(value))
    if value is None:
        return DELETE
    return str(value)


@dataclass(frozen=True)
class EditAtom:
    """Sets charge, chirality, explicit hydrogens and aromaticity of one atom jointly."""
    formal_charge: int = 0
    chiral_tag: ChiralTag = ChiralTag.NONE
    explicit_h_count: int = 0
    is_aromatic: bool = False

    kind: ClassVar[ActionKind] = ActionKind.EDIT_ATOM
    is_bond_action: ClassVar[bool] = False

    def sort_key(self) -> tuple:
        return (self.formal_charge, CHIRAL_ORDER[self.chiral_tag], self.explicit_h_count, int(self.is_aromatic))


@dataclass(frozen=True)
class EditBond:
    """Creates, retypes or (bond_type None) deletes the bond between two atoms."""
    bond_type: Optional[BondType] = None
    stereo: BondStereo = BondStereo.NONE

    kind: ClassVar[ActionKind] = ActionKind.EDIT_BOND
    is_bond_action: ClassVar[bool] = True

    @property
    def is_delete(self) -> bool:
        return self.bond_type is None

    def sort_key(self) -> tuple:
        type_key = -1 if self.bond_type is None else BOND_TYPE_ORDER[self.bond_type]
        return (type_key, STEREO_ORDER[self.stereo])


@dataclass(frozen=True)
class AddAtom:
    """Appends a new atom bonded to the anchor."""
    atomic_number: int
    formal_charge: int = 0
    chiral_tag: ChiralTag = ChiralTag.NONE
    explicit_h_count: int = 0
    is_aromatic: bool = False
    bond_type: BondType = BondType.SINGLE
    bond_stereo: BondStereo = BondStereo.NONE

    kind: ClassVar[ActionKind] = ActionKind.ADD_ATOM
    is_bond_action: ClassVar[bool] = False

    def sort_key(self) -> tuple:
        return (self.atomic_number, self.formal_charge, CHIRAL_ORDER[self.chiral_tag], self.explicit_h_count,
                int(self.is_aromatic), BOND_TYPE_ORDER[self.bond_type], STEREO_ORDER[self.bond_stereo])


@dataclass(frozen=True)
class AddBenzene:
    """Appends an aromatic six-carbon ring, one carbon single-bonded to the anchor."""
    kind: ClassVar[ActionKind] = ActionKind.ADD_BENZENE
    is_bond_action: ClassVar[bool] = False

    def sort_key(self) -> tuple:
        return ()


@dataclass(frozen=True)
class Stop:
    kind: ClassVar[ActionKind] = ActionKind.STOP
    is_bond_action: ClassVar[bool] = False

    def sort_key(self) -> tuple:
        return ()


EditAction = Union[EditAtom, EditBond, AddAtom, AddBenzene, Stop]
ACTION_CLASSES = {cls.kind: cls for cls in (EditAtom, EditBond, AddAtom, AddBenzene, Stop)}


def action_sort_key(action: EditAction) -> tuple:
    return (KIND_ORDER[action.kind], action.sort_key())


def action_params(action: EditAction) -> Dict[str, str]:
    return {f.name: _format(getattr(action, f.name)) for f in fields(action)}


def action_to_line(action: EditAction) -> str:
    params = action_params(action)
    return " ".join([action.kind.value] + [f"{key}={params[key]}" for key in sorted(params)])


def action_from_line(line: str) -> EditAction:
    parts = line.split()
    if not parts:
        raise ValueError("empty action line")
    try:
        cls = ACTION_CLASSES[ActionKind(parts[0])]
    except ValueError:
        raise ValueError(f"unknown action kind '{parts[0]}'")
    raw = dict(part.split("=", 1) for part in parts[1:])
    values = {}
    for f in fields(cls):
        if f.name not in raw:
            raise ValueError(f"action line '{line}' misses parameter '{f.name}'")
        text = raw.pop(f.name)
        if f.name in ("chiral_tag",):
            values[f.name] = ChiralTag(text)
        elif f.name in ("stereo", "bond_stereo"):
            values[f.name] = BondStereo(text)
        elif f.name == "bond_type":
            values[f.name] = None if text == DELETE else BondType(text)
        elif f.name == "is_aromatic":
            values[f.name] = bool(int(text))
        else:
            values[f.name] = int(text)
    if raw:
        raise ValueError(f"action line '{line}' has unknown parameters {sorted(raw)}")
    return cls(**values)


@dataclass(frozen=True)
class ActionTarget:
    """Atom index, or an ordered atom pair (atom < partner) for bond actions."""
    atom: int
    partner: Optional[int] = None

    def __post_init__(self):
        if self.partner is not None and self.partner <= self.atom:
            raise ValueError(f"bond targets need atom < partner, got ({self.atom}, {self.partner})")

    @classmethod
    def bond(cls, i: int, j: int) -> 'ActionTarget':
        return cls(min(i, j), max(i, j))

    @property
    def is_pair(self) -> bool:
        return self.partner is not None

    @property
    def indices(self) -> Tuple[int, ...]:
        return (self.atom,) if self.partner is None else (self.atom, self.partner)
