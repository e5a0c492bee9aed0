"""
Beam search over edit actions.

Usage:
    decoder = MeganDecoder(model)
    prediction = predict(decoder, input_graph, width=50, max_steps=16, direction=Direction.RETRO)
    for candidate in prediction.candidates:
        print(candidate.smiles, candidate.score)

`beam_search` only needs a `StepDecoder`: something that scores every slot of
the current state and advances a state by one slot. The MEGAN adapter scores
with the network and advances by applying the decoded action to the graph.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, List, Optional, Protocol, Sequence, Tuple

import numpy as np

from actions.apply import apply_action
from actions.exceptions import InvalidTarget
from chem.exceptions import ChemError
from chem.molgraph import MolGraph
from model.megan import MeganModel, StepState
from numcore.tensor import no_grad
from oracle.reaction import Direction, comparison_smiles, main_component

logger = logging.getLogger(__name__)


class StepDecoder(Protocol):

    def log_probs(self, state: Any) -> Tuple[np.ndarray, Any]:
        """Log-probability of every slot, plus whatever `advance` needs from this step."""

    def advance(self, state: Any, slot: int, carry: Any) -> Tuple[Any, bool]:
        """Next state and whether the slot ended the sequence."""


@dataclass
class BeamHypothesis:
    state: Any
    slots: Tuple[int, ...] = ()
    log_prob: float = 0.0
    finished: bool = False     # Stop emitted
    truncated: bool = False    # ran into max_steps without Stop

    def score(self, length_normalization: bool = False) -> float:
        if length_normalization and self.slots:
            return self.log_prob / len(self.slots)
        return self.log_prob


def _ranked(hypotheses: Sequence[BeamHypothesis], length_normalization: bool) -> List[BeamHypothesis]:
    return sorted(hypotheses, key=lambda h: (-h.score(length_normalization), h.slots))


def beam_search(decoder: StepDecoder, initial: Any, width: int, max_steps: int,
                length_normalization: bool = False) -> List[BeamHypothesis]:
    """
    Finished and truncated hypotheses, best first.

    Every step expands each live hypothesis by its `width` best slots and keeps
    the `width` best expansions overall; hypotheses that emitted Stop are frozen
    and keep competing by their total log-probability.
    """
    if width < 1:
        raise ValueError(f"beam width must be at least 1, got {width}")
    alive = [BeamHypothesis(initial)]
    done: List[BeamHypothesis] = []

    for _ in range(max_steps):
        expansions = []
        for parent in alive:
            log_probs, carry = decoder.log_probs(parent.state)
            best = np.argsort(-log_probs, kind='stable')[:width]
            for slot in best:
                expansions.append((parent.log_prob + float(log_probs[slot]), parent.slots + (int(slot),),
                                   parent, carry))
        expansions.sort(key=lambda e: (-e[0], e[1]))

        alive = []
        for log_prob, slots, parent, carry in expansions[:width]:
            state, finished = decoder.advance(parent.state, slots[-1], carry)
            hypothesis = BeamHypothesis(state, slots, log_prob, finished=finished)
            (done if finished else alive).append(hypothesis)
        if not alive:
            break
        if not length_normalization and len(done) >= width:
            # live scores only fall from here
            floor = _ranked(done, False)[width - 1].log_prob
            if max(h.log_prob for h in alive) < floor:
                alive = []
                break

    for hypothesis in alive:
        hypothesis.truncated = True
    return _ranked(done + alive, length_normalization)


# ---- MEGAN adapter -------------------------------------------------------------


class MeganDecoder:
    """StepDecoder over MEGAN step states; invalid actions leave the graph as it is."""

    def __init__(self, model: MeganModel):
        self.model = model
        self.invalid_actions = 0

    def start(self, graph: MolGraph, reaction_class: Optional[int] = None) -> StepState:
        graph = graph if graph.has_supernode else graph.add_supernode()
        return self.model.start(graph, reaction_class)

    def log_probs(self, state: StepState) -> Tuple[np.ndarray, Any]:
        with no_grad():
            hidden, log_probs = self.model.log_probs(state)
        return log_probs.value.astype(np.float64), hidden

    def advance(self, state: StepState, slot: int, carry: Any) -> Tuple[StepState, bool]:
        action, target = self.model.layout(state.graph).decode(slot)
        try:
            graph, terminated = apply_action(state.graph, action, target)
        except (InvalidTarget, ChemError) as exc:
            self.invalid_actions += 1
            logger.debug(f"Ignoring {action} at {target.indices}: {exc}")
            graph, terminated = state.graph, False
        if terminated:
            return StepState(graph, state.tensors, carry, terminated=True), True
        return self.model.advance(state, graph, carry), False


@dataclass(frozen=True)
class RankedCandidate:
    smiles: str      # map-free canonical molecule set
    score: float


@dataclass
class Prediction:
    reaction_id: str
    input: str
    candidates: List[RankedCandidate] = field(default_factory=list)
    raw_count: int = 0             # hypotheses read off as candidates
    valence_failures: int = 0
    error: Optional[str] = None    # reason when the input could not be decoded

    @property
    def ok(self) -> bool:
        return self.error is None

    def top(self, k: int) -> List[str]:
        return [c.smiles for c in self.candidates[:k]]


def candidate_key(graph: MolGraph, direction: Direction) -> str:
    """Canonical answer read off a final graph; forward keeps only the main product."""
    graph = graph.without_supernode()
    if direction is Direction.FORWARD:
        graph = main_component(graph)
    return comparison_smiles(graph)


def predict(decoder: MeganDecoder, graph: MolGraph, width: int, max_steps: int, direction: Direction,
            reaction_class: Optional[int] = None, reaction_id: str = "", text: str = "",
            length_normalization: bool = False, keep_truncated: bool = True) -> Prediction:
    """
    Unique candidates of one input, best first.

    A hypothesis that reached `max_steps` without Stop is read off as it stands
    unless `keep_truncated` is off.
    """
    hypotheses = beam_search(decoder, decoder.start(graph, reaction_class), width, max_steps, length_normalization)
    prediction = Prediction(reaction_id=reaction_id, input=text)
    seen = set()
    for hypothesis in hypotheses:
        if not (hypothesis.finished or (keep_truncated and hypothesis.truncated)):
            continue
        prediction.raw_count += 1
        try:
            key = candidate_key(hypothesis.state.graph, direction)
        except ChemError as exc:
            prediction.valence_failures += 1
            logger.debug(f"{reaction_id}: dropping hypothesis {hypothesis.slots}: {exc}")
            continue
        if key in seen:
            continue
        seen.add(key)
        prediction.candidates.append(RankedCandidate(key, hypothesis.score(length_normalization)))
    return prediction
