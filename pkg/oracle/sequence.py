"""
Teacher-forcing targets: one action sequence per mapped reaction.

Usage:
    reaction = reaction_from_smiles(text, Direction.RETRO)
    sample = generate_sequence(reaction, OrderingPolicy(OrderingStrategy.BFS_CANOAT), max_steps=16)
    for graph, action, target in sample.states():
        ...

Stereo parameters are settled after ordering: the sequence is replayed, the
target's chiral tags and E/Z labels are re-expressed in the final graph's
numbering, and the last action that set each one is patched to match.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from actions.apply import apply_action, apply_sequence
from actions.edit_action import ActionTarget, AddAtom, EditAction, EditAtom, EditBond
from chem.molgraph import BondStereo, ChiralTag, MolGraph, pair
from chem.stereo import HYDROGEN, chiral_reference, reorder_chiral_tag, stereo_in_default_frame, stereo_reference

from .exceptions import InternalInconsistency, ReconstructionError, SequenceTooLong
from .ordering import OracleState, OrderingPolicy, atom_ranking, next_action
from .pending import PendingEditSet, diff_reaction
from .reaction import Direction, Reaction, comparison_smiles

logger = logging.getLogger(__name__)

Step = Tuple[EditAction, ActionTarget]


@dataclass
class TrainingSample:
    reaction_id: str
    direction: Direction
    source: MolGraph            # without supernode
    target: MolGraph
    steps: List[Step]
    reaction_class: Optional[int] = None
    benzene_counterexamples: int = 0

    def __len__(self) -> int:
        return len(self.steps)

    def states(self) -> Iterator[Tuple[MolGraph, EditAction, ActionTarget]]:
        """(graph before the step, action, target) for every step, Stop included."""
        graph = self.source.add_supernode()
        for action, target in self.steps:
            yield graph, action, target
            graph, terminated = apply_action(graph, action, target)
            if terminated:
                return

    def final_graph(self) -> MolGraph:
        return apply_sequence(self.source.add_supernode(), self.steps)

    @property
    def actions(self) -> List[EditAction]:
        return [action for action, _ in self.steps]


@dataclass
class _Setters:
    """Step index of the last action that wrote each atom's chirality / each bond's stereo."""
    atoms: Dict[int, int] = field(default_factory=dict)
    bonds: Dict[Tuple[int, int], int] = field(default_factory=dict)

    def record(self, k: int, action: EditAction, target: ActionTarget, created: Optional[int]) -> None:
        if isinstance(action, EditAtom):
            self.atoms[target.atom] = k
        elif isinstance(action, EditBond) and not action.is_delete:
            self.bonds[(target.atom, target.partner)] = k
        elif isinstance(action, AddAtom):
            self.atoms[created] = k
            self.bonds[pair(target.atom, created)] = k


def _patch_stereo(steps: List[Step], final: MolGraph, target: MolGraph, graph_to_target: Dict[int, int],
                  setters: _Setters) -> List[Step]:
    target_to_graph = {t: g for g, t in graph_to_target.items()}
    patched = list(steps)

    def set_param(k: int, **values) -> None:
        action, where = patched[k]
        patched[k] = (replace(action, **values), where)

    for t, atom in enumerate(target.nodes):
        if atom.chiral_tag is ChiralTag.NONE:
            continue
        g = target_to_graph[t]
        wanted = [k if k == HYDROGEN else target_to_graph[k] for k in chiral_reference(target, t)]
        frame = chiral_reference(final, g)
        if sorted(wanted) != sorted(frame):
            continue  # neighbourhood differs; reconstruction check reports it
        desired = reorder_chiral_tag(atom.chiral_tag, wanted, frame)
        if final.nodes[g].chiral_tag is desired:
            continue
        if g not in setters.atoms:
            raise InternalInconsistency(f"no action sets the chirality of atom {g}")
        set_param(setters.atoms[g], chiral_tag=desired)

    for (ti, tj), bond in target.edges.items():
        if bond.stereo is BondStereo.NONE:
            continue
        reference = stereo_reference(target, ti, tj)
        if reference is None:
            continue
        gi, gj = target_to_graph[ti], target_to_graph[tj]
        present = final.bond(gi, gj)
        if present is None:
            continue
        desired = stereo_in_default_frame(final, gi, gj, bond.stereo, target_to_graph[reference[0]],
                                          target_to_graph[reference[1]])
        if present.stereo is desired:
            continue
        key = pair(gi, gj)
        if key not in setters.bonds:
            raise InternalInconsistency(f"no action sets the stereo of bond {key}")
        k = setters.bonds[key]
        if isinstance(patched[k][0], AddAtom):
            set_param(k, bond_stereo=desired)
        else:
            set_param(k, stereo=desired)
    return patched


def generate_sequence(reaction: Reaction, policy: OrderingPolicy, max_steps: int = 16,
                      pending: Optional[PendingEditSet] = None) -> TrainingSample:
    """Order the reaction's edits into actions ending in Stop; length counts the Stop."""
    pending = diff_reaction(reaction) if pending is None else pending
    rng = np.random.default_rng(policy.rng_seed)
    state = OracleState.start(reaction, pending, atom_ranking(reaction, policy, rng))
    steps: List[Step] = []
    setters = _Setters()
    # a runaway loop means a diff bug; every pending edit is discharged by exactly one step
    budget = len(pending) + 1
    while True:
        candidate = next_action(state, policy, rng, reaction.direction)
        steps.append((candidate.action, candidate.target))
        if candidate.item[0] == "stop":
            break
        if len(steps) > budget:
            raise InternalInconsistency(f"{reaction.reaction_id}: ordering did not terminate")
        created = state.graph.num_atoms if isinstance(candidate.action, AddAtom) else None
        setters.record(len(steps) - 1, candidate.action, candidate.target, created)
        state.advance(candidate)

    steps = _patch_stereo(steps, state.graph, reaction.target, state.graph_to_target, setters)
    if len(steps) > max_steps:
        raise SequenceTooLong(len(steps), max_steps)

    sample = TrainingSample(reaction_id=reaction.reaction_id, direction=reaction.direction,
                            source=reaction.source, target=reaction.target, steps=steps,
                            reaction_class=reaction.reaction_class,
                            benzene_counterexamples=pending.benzene_counterexamples)
    produced = comparison_smiles(sample.final_graph())
    expected = comparison_smiles(reaction.target)
    if produced != expected:
        logger.error(f"{reaction.reaction_id}: reconstruction gives {produced}, expected {expected}")
        raise ReconstructionError(produced, expected)
    return sample
