"""
Ordering of pending edits into a single action sequence.

At every step the candidate atoms are those with an applicable pending edit.
BFS strategies act on atoms that have not been modified yet and, once every
candidate has been touched, on the one modified longest ago; DFS strategies
stay on modified atoms, most recent first. Remaining ties go to the atom
ranking: canonical SMILES output order of the target (CanoAT) or a seeded
random permutation (RandAT). Among the chosen atom's edits the action kind
with the highest priority wins, then the partner atom with the best rank.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from actions.apply import apply_action, stop_target
from actions.edit_action import ActionTarget, AddBenzene, EditAction, Stop
from chem.molgraph import MolGraph
from chem.smiles_writer import canonical_ranks

from .exceptions import InternalInconsistency
from .pending import Addition, NewAtom, NodeRef, PendingEditSet
from .reaction import Direction, Reaction

logger = logging.getLogger(__name__)


class OrderingStrategy(Enum):
    BFS_RANDAT = "bfs-rand"
    DFS_RANDAT = "dfs-rand"
    BFS_CANOAT = "bfs-cano"
    DFS_CANOAT = "dfs-cano"
    RANDOM = "random"

    @property
    def is_bfs(self) -> bool:
        return self in (OrderingStrategy.BFS_RANDAT, OrderingStrategy.BFS_CANOAT)

    @property
    def is_canonical(self) -> bool:
        return self in (OrderingStrategy.BFS_CANOAT, OrderingStrategy.DFS_CANOAT)


@dataclass(frozen=True)
class OrderingPolicy:
    strategy: OrderingStrategy = OrderingStrategy.BFS_CANOAT
    rng_seed: int = 0

    def __str__(self) -> str:
        return f"{self.strategy.value} (seed {self.rng_seed})"


class EditGroup(IntEnum):
    DELETE_BOND = 0
    ADD_BOND = 1
    RETYPE_BOND = 2
    EDIT_ATOM = 3
    ADD_BENZENE = 4
    ADD_ATOM = 5
    STOP = 6


RETRO_PRIORITY = {group: rank for rank, group in enumerate(EditGroup)}
FORWARD_PRIORITY = {**RETRO_PRIORITY, EditGroup.ADD_BOND: 0, EditGroup.DELETE_BOND: 1}


def priority_table(direction: Direction) -> Dict[EditGroup, int]:
    return RETRO_PRIORITY if direction is Direction.RETRO else FORWARD_PRIORITY


@dataclass(frozen=True)
class Candidate:
    action: EditAction
    target: ActionTarget
    group: EditGroup
    atoms: Tuple[int, ...]   # graph indices the action touches
    item: tuple              # key of the pending entry it discharges


@dataclass
class OracleState:
    """Partial graph plus what is still to be done; mutated in place by `advance`."""
    graph: MolGraph
    pending: PendingEditSet
    ranks: Sequence[int]                  # per target atom
    graph_to_target: Dict[int, int]
    realized: Dict[int, int] = field(default_factory=dict)        # target-only atom -> graph index
    last_modified: Dict[int, int] = field(default_factory=dict)   # graph index -> step
    step: int = 0

    @classmethod
    def start(cls, reaction: Reaction, pending: PendingEditSet, ranks: Sequence[int]) -> 'OracleState':
        return cls(graph=reaction.source.add_supernode(), pending=pending.copy(), ranks=ranks,
                   graph_to_target=dict(reaction.correspondence))

    def resolve(self, ref: NodeRef) -> Optional[int]:
        if isinstance(ref, NewAtom):
            return self.realized.get(ref.target_index)
        return ref

    def rank(self, graph_index: int) -> int:
        return self.ranks[self.graph_to_target[graph_index]]

    def advance(self, candidate: Candidate) -> None:
        base = self.graph.num_atoms
        self.graph, _ = apply_action(self.graph, candidate.action, candidate.target)
        touched = list(candidate.atoms)
        kind, key = candidate.item
        if kind == "atom":
            del self.pending.atom_edits[key]
        elif kind == "bond":
            del self.pending.bond_edits[key]
        else:
            addition = self.pending.additions.pop(key)
            for offset, t in enumerate(addition.created):
                self.realized[t] = base + offset
                self.graph_to_target[base + offset] = t
                touched.append(base + offset)
        for g in touched:
            self.last_modified[g] = self.step
        self.step += 1


def atom_ranking(reaction: Reaction, policy: OrderingPolicy, rng: np.random.Generator) -> List[int]:
    """Rank per target atom: canonical output position, or a seeded random permutation."""
    if policy.strategy.is_canonical:
        return canonical_ranks(reaction.target)
    return [int(r) for r in rng.permutation(reaction.target.num_atoms)]


def _addition_candidate(state: OracleState, index: int, addition: Addition) -> Optional[Candidate]:
    anchor = state.resolve(addition.anchor)
    if anchor is None:
        return None
    group = EditGroup.ADD_BENZENE if isinstance(addition.action, AddBenzene) else EditGroup.ADD_ATOM
    return Candidate(addition.action, ActionTarget(anchor), group, (anchor,), ("add", index))


def candidates(state: OracleState) -> List[Candidate]:
    """Every pending edit applicable to the current graph."""
    found: List[Candidate] = []
    for s, action in sorted(state.pending.atom_edits.items()):
        found.append(Candidate(action, ActionTarget(s), EditGroup.EDIT_ATOM, (s,), ("atom", s)))
    for key, action in state.pending.bond_edits.items():
        i, j = state.resolve(key[0]), state.resolve(key[1])
        if i is None or j is None:
            continue
        present = state.graph.bond(i, j) is not None
        if action.is_delete:
            if not present:
                raise InternalInconsistency(f"pending delete of missing bond ({i}, {j})")
            group = EditGroup.DELETE_BOND
        else:
            group = EditGroup.RETYPE_BOND if present else EditGroup.ADD_BOND
        found.append(Candidate(action, ActionTarget.bond(i, j), group, tuple(sorted((i, j))), ("bond", key)))
    for index, addition in enumerate(state.pending.additions):
        candidate = _addition_candidate(state, index, addition)
        if candidate is not None:
            found.append(candidate)
    return found


def _partner_rank(state: OracleState, candidate: Candidate, atom: int) -> int:
    if candidate.item[0] == "add":
        return state.ranks[state.pending.additions[candidate.item[1]].created[0]]
    others = [g for g in candidate.atoms if g != atom]
    return state.rank(others[0]) if others else -1


def choose_atom(state: OracleState, atoms: Sequence[int], strategy: OrderingStrategy) -> int:
    modified = [a for a in atoms if a in state.last_modified]
    if strategy.is_bfs:
        pool = [a for a in atoms if a not in state.last_modified] or list(atoms)
        return min(pool, key=lambda a: (state.last_modified.get(a, -1), state.rank(a)))
    pool = modified or list(atoms)
    return min(pool, key=lambda a: (-state.last_modified.get(a, -1), state.rank(a)))


def next_action(state: OracleState, policy: OrderingPolicy, rng: np.random.Generator,
                direction: Direction = Direction.RETRO) -> Candidate:
    """Pick the next edit, or Stop at the supernode once nothing is pending."""
    if state.pending.is_empty:
        return Candidate(Stop(), stop_target(state.graph), EditGroup.STOP, (), ("stop", None))
    available = candidates(state)
    if not available:
        raise InternalInconsistency(f"{len(state.pending)} pending edits but none applicable")
    priority = priority_table(direction)

    if policy.strategy is OrderingStrategy.RANDOM:
        ordered = sorted(available, key=lambda c: (c.atoms, priority[c.group], str(c.item)))
        return ordered[int(rng.integers(len(ordered)))]

    atoms = sorted({a for c in available for a in c.atoms})
    atom = choose_atom(state, atoms, policy.strategy)
    own = [c for c in available if atom in c.atoms]
    return min(own, key=lambda c: (priority[c.group], _partner_rank(state, c, atom), str(c.item)))
