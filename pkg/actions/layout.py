"""
Mapping between positions in the model's concatenated logit vector and
(action, target) pairs.

Layout for a graph with n atoms (supernode at index n):
    [atom 0: atom actions][atom 1: ...]...[pair (0,1): bond actions][pair (0,2): ...]...[Stop]
Pairs run over i < j in lexicographic order.
"""

from dataclasses import dataclass
from typing import List, Tuple

from chem.molgraph import MolGraph

from .edit_action import ActionTarget, EditAction, Stop
from .vocab import ActionVocab


@dataclass(frozen=True)
class ActionLayout:
    vocab: ActionVocab
    n_atoms: int

    @property
    def n_atom_actions(self) -> int:
        return len(self.vocab.atom_actions)

    @property
    def n_bond_actions(self) -> int:
        return len(self.vocab.bond_actions)

    @property
    def n_pairs(self) -> int:
        return self.n_atoms * (self.n_atoms - 1) // 2

    @property
    def atom_block(self) -> int:
        return self.n_atoms * self.n_atom_actions

    @property
    def bond_block(self) -> int:
        return self.n_pairs * self.n_bond_actions

    @property
    def stop_slot(self) -> int:
        return self.atom_block + self.bond_block

    @property
    def size(self) -> int:
        return self.stop_slot + 1

    def pair_index(self, i: int, j: int) -> int:
        n = self.n_atoms
        return i * n - i * (i + 1) // 2 + (j - i - 1)

    def pairs(self) -> List[Tuple[int, int]]:
        return [(i, j) for i in range(self.n_atoms) for j in range(i + 1, self.n_atoms)]

    def encode(self, action: EditAction, target: ActionTarget) -> int:
        if isinstance(action, Stop):
            return self.stop_slot
        if action.is_bond_action:
            return self.atom_block + self.pair_index(target.atom, target.partner) * self.n_bond_actions \
                + self.vocab.bond_slot(action)
        return target.atom * self.n_atom_actions + self.vocab.atom_slot(action)

    def decode(self, slot: int) -> Tuple[EditAction, ActionTarget]:
        if slot < 0 or slot >= self.size:
            raise IndexError(f"slot {slot} outside layout of size {self.size}")
        if slot == self.stop_slot:
            return Stop(), ActionTarget(self.n_atoms)
        if slot < self.atom_block:
            atom, k = divmod(slot, self.n_atom_actions)
            return self.vocab.atom_actions[k], ActionTarget(atom)
        p, k = divmod(slot - self.atom_block, self.n_bond_actions)
        i = 0
        # walk rows of the upper triangle
        while p >= self.n_atoms - 1 - i:
            p -= self.n_atoms - 1 - i
            i += 1
        return self.vocab.bond_actions[k], ActionTarget(i, i + 1 + p)


def action_space_layout(vocab: ActionVocab, graph: MolGraph) -> ActionLayout:
    """Layout for a graph carrying a supernode."""
    return ActionLayout(vocab, graph.num_atoms)
