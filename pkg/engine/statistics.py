from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd


class Statistics:
    """Top-k accuracy of ranked predictions against ground-truth answers, keyed by reaction id."""

    @staticmethod
    def first_hit_ranks(predictions: Mapping[str, Sequence[str]], truth: Mapping[str, str]) -> Dict[str, int]:
        """1-based rank of the ground truth per reaction, 0 when it is not predicted at all."""
        ranks = {}
        for reaction_id, answer in truth.items():
            ranked = predictions.get(reaction_id, ())
            ranks[reaction_id] = next((k + 1 for k, candidate in enumerate(ranked) if candidate == answer), 0)
        return ranks

    @staticmethod
    def top_k_accuracy(predictions: Mapping[str, Sequence[str]], truth: Mapping[str, str],
                       ks: Sequence[int]) -> pd.DataFrame:
        """One row per k: k, top_k (fraction), hits, n. Reactions without a prediction count as misses."""
        ranks = np.array(list(Statistics.first_hit_ranks(predictions, truth).values()), dtype=np.int64)
        return Statistics._table(ranks, ks)

    @staticmethod
    def _table(ranks: np.ndarray, ks: Sequence[int]) -> pd.DataFrame:
        n = int(ranks.size)
        rows = []
        for k in sorted(ks):
            hits = int(np.count_nonzero((ranks > 0) & (ranks <= k)))
            rows.append({'k': k, 'top_k': hits / n if n else 0.0, 'hits': hits, 'n': n})
        return pd.DataFrame(rows, columns=['k', 'top_k', 'hits', 'n'])

    @staticmethod
    def per_class_accuracy(predictions: Mapping[str, Sequence[str]], truth: Mapping[str, str],
                           classes: Mapping[str, Optional[int]], ks: Sequence[int]) -> pd.DataFrame:
        """Top-k table per reaction class; reactions without a class are left out."""
        ranks = Statistics.first_hit_ranks(predictions, truth)
        frames = []
        for reaction_class in sorted({c for c in classes.values() if c is not None}):
            members = np.array([ranks[r] for r in ranks if classes.get(r) == reaction_class], dtype=np.int64)
            table = Statistics._table(members, ks)
            table.insert(0, 'class', reaction_class)
            frames.append(table)
        if not frames:
            return pd.DataFrame(columns=['class', 'k', 'top_k', 'hits', 'n'])
        return pd.concat(frames, ignore_index=True)

    @staticmethod
    def summary(table: pd.DataFrame, extra: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        """Flat key/value view of a top-k table for the metrics.kv file."""
        result: Dict[str, Any] = {'n': int(table['n'].iloc[0]) if len(table) else 0}
        for row in table.itertuples(index=False):
            result[f'top_{row.k}'] = round(float(row.top_k), 6)
            result[f'hits_{row.k}'] = int(row.hits)
        result.update(extra or {})
        return result

    @staticmethod
    def is_monotone(table: pd.DataFrame) -> bool:
        values: List[float] = list(table.sort_values('k')['top_k'])
        return all(a <= b for a, b in zip(values, values[1:]))
