"""
Vocabulary and dataset statistics gathered from generated sequences.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable

import numpy as np
import pandas as pd

from actions.vocab import ActionVocab

from .sequence import TrainingSample

logger = logging.getLogger(__name__)


def build_vocab(samples: Iterable[TrainingSample]) -> ActionVocab:
    """Distinct actions over the samples; Stop is always present. Order-independent."""
    return ActionVocab(action for sample in samples for action in sample.actions)


@dataclass
class SequenceStatistics:
    """Counters a preprocessing run reports."""
    accepted: int = 0
    rejected: Counter = field(default_factory=Counter)          # reason -> count
    lengths: Counter = field(default_factory=Counter)           # sequence length -> count
    first_kinds: Counter = field(default_factory=Counter)       # kind of the first action -> count
    kinds: Counter = field(default_factory=Counter)             # kind -> count over all steps
    benzene_counterexamples: int = 0
    dropped_components: int = 0

    def add(self, sample: TrainingSample) -> None:
        self.accepted += 1
        self.lengths[len(sample)] += 1
        self.first_kinds[sample.actions[0].kind.value] += 1
        self.kinds.update(action.kind.value for action in sample.actions)
        self.benzene_counterexamples += sample.benzene_counterexamples

    def reject(self, reason: str) -> None:
        self.rejected[reason] += 1

    @property
    def total(self) -> int:
        return self.accepted + sum(self.rejected.values())

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.total if self.total else 0.0

    def to_dict(self) -> Dict[str, Any]:
        lengths = np.repeat(list(self.lengths.keys()), list(self.lengths.values())) if self.lengths else np.zeros(0)
        return {
            'total': self.total,
            'accepted': self.accepted,
            'acceptance_rate': round(self.acceptance_rate, 6),
            'rejected': dict(sorted(self.rejected.items())),
            'length_histogram': {str(k): v for k, v in sorted(self.lengths.items())},
            'mean_length': float(lengths.mean()) if lengths.size else 0.0,
            'max_length': int(lengths.max()) if lengths.size else 0,
            'first_action_kinds': dict(sorted(self.first_kinds.items())),
            'action_kinds': dict(sorted(self.kinds.items())),
            'benzene_counterexamples': self.benzene_counterexamples,
            'dropped_components': self.dropped_components,
        }

    def to_frame(self) -> pd.DataFrame:
        """Long-format table (section, key, count) for the delimited text report."""
        rows = [('summary', 'accepted', self.accepted), ('summary', 'total', self.total),
                ('summary', 'benzene_counterexamples', self.benzene_counterexamples),
                ('summary', 'dropped_components', self.dropped_components)]
        rows += [('rejected', k, v) for k, v in sorted(self.rejected.items())]
        rows += [('length', str(k), v) for k, v in sorted(self.lengths.items())]
        rows += [('first_kind', k, v) for k, v in sorted(self.first_kinds.items())]
        rows += [('kind', k, v) for k, v in sorted(self.kinds.items())]
        return pd.DataFrame(rows, columns=['section', 'key', 'count'])

    def log_summary(self) -> None:
        logger.info("=" * 60)
        logger.info(f"Sequences: {self.accepted}/{self.total} accepted ({self.acceptance_rate:.2%})")
        for reason, count in sorted(self.rejected.items()):
            logger.info(f"  rejected {reason}: {count}")
        if self.lengths:
            logger.info(f"  longest sequence: {max(self.lengths)} actions")
        logger.info(f"  AddBenzene counterexamples: {self.benzene_counterexamples}")
        logger.info("=" * 60)
