"""
Action vocabulary: the ordered set of distinct action parameterizations.

Ordering is by kind (EditAtom, EditBond, AddAtom, AddBenzene, Stop) and then
by parameter tuple, so a vocabulary built from the same actions is
byte-identical whatever the order they were found in.
"""

import logging
from collections import Counter
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Tuple, Union

from .edit_action import (ActionKind, EditAction, Stop, action_from_line, action_sort_key, action_to_line)

logger = logging.getLogger(__name__)

VOCAB_FORMAT = "megan-action-vocab"
VOCAB_VERSION = 1


class ActionVocab:

    def __init__(self, actions: Iterable[EditAction] = ()):
        unique = set(actions)
        unique.add(Stop())
        self.actions: Tuple[EditAction, ...] = tuple(sorted(unique, key=action_sort_key))
        self._index: Dict[EditAction, int] = {a: k for k, a in enumerate(self.actions)}
        self.atom_actions: Tuple[EditAction, ...] = tuple(
            a for a in self.actions if not a.is_bond_action and a.kind is not ActionKind.STOP)
        self.bond_actions: Tuple[EditAction, ...] = tuple(a for a in self.actions if a.is_bond_action)
        self._atom_slot = {a: k for k, a in enumerate(self.atom_actions)}
        self._bond_slot = {a: k for k, a in enumerate(self.bond_actions)}

    def __len__(self) -> int:
        return len(self.actions)

    def __iter__(self) -> Iterator[EditAction]:
        return iter(self.actions)

    def __contains__(self, action: EditAction) -> bool:
        return action in self._index

    def __getitem__(self, index: int) -> EditAction:
        return self.actions[index]

    def __eq__(self, other) -> bool:
        return isinstance(other, ActionVocab) and self.actions == other.actions

    def index_of(self, action: EditAction) -> int:
        return self._index[action]

    def atom_slot(self, action: EditAction) -> int:
        return self._atom_slot[action]

    def bond_slot(self, action: EditAction) -> int:
        return self._bond_slot[action]

    def counts(self) -> Dict[str, int]:
        counter = Counter(a.kind.value for a in self.actions)
        return {kind.value: counter.get(kind.value, 0) for kind in ActionKind}

    # ---- text file -------------------------------------------------------

    def to_lines(self) -> List[str]:
        return [action_to_line(a) for a in self.actions]

    def save(self, path: Union[str, Path], config_hash: str = "") -> None:
        header = f"# {VOCAB_FORMAT} v{VOCAB_VERSION} config={config_hash}"
        Path(path).write_text("\n".join([header] + self.to_lines()) + "\n", encoding="utf-8")
        logger.info(f"Saved vocabulary with {len(self)} actions to {path}")

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> 'ActionVocab':
        return cls(action_from_line(line) for line in lines if line.strip() and not line.startswith("#"))

    @classmethod
    def load(cls, path: Union[str, Path]) -> 'ActionVocab':
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if not lines or not lines[0].startswith(f"# {VOCAB_FORMAT} v"):
            raise ValueError(f"{path} is not an action vocabulary file")
        version = int(lines[0].split()[2].lstrip("v"))
        if version != VOCAB_VERSION:
            raise ValueError(f"{path}: unsupported vocabulary version {version}")
        return cls.from_lines(lines[1:])

    def __str__(self) -> str:
        counts = ", ".join(f"{kind} {n}" for kind, n in self.counts().items())
        return f"ActionVocab({len(self)} actions: {counts})"
