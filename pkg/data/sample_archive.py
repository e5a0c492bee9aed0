"""
Sample archive: gzip-compressed JSON lines holding preprocessed training samples.

Line 1 is a header {"format", "version", "config_hash", "direction"}; every
following line is one sample with its source/target graphs and its actions as
[vocab_index, i, j] triples (j = -1 for single-atom targets).

Usage:
    with SampleArchiveWriter(path, vocab, config_hash, Direction.RETRO) as archive:
        archive.write(sample)
    samples = list(read_samples(path, vocab))
"""

import gzip
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterator, Optional, Union

from actions.edit_action import ActionTarget
from actions.vocab import ActionVocab
from chem.molgraph import MolGraph
from oracle.reaction import Direction
from oracle.sequence import TrainingSample

from .exceptions import DataError

logger = logging.getLogger(__name__)

ARCHIVE_FORMAT = "megan-samples"
ARCHIVE_VERSION = 1


def sample_to_record(sample: TrainingSample, vocab: ActionVocab) -> Dict[str, Any]:
    actions = [[vocab.index_of(action), target.atom, -1 if target.partner is None else target.partner]
               for action, target in sample.steps]
    return {
        'id': sample.reaction_id,
        'reaction_class': sample.reaction_class,
        'source': sample.source.to_record(),
        'target': sample.target.to_record(),
        'actions': actions,
        'benzene_counterexamples': sample.benzene_counterexamples,
    }


def sample_from_record(record: Dict[str, Any], vocab: ActionVocab, direction: Direction) -> TrainingSample:
    try:
        steps = [(vocab[index], ActionTarget(i, None if j < 0 else j)) for index, i, j in record['actions']]
        return TrainingSample(reaction_id=record['id'], direction=direction,
                              source=MolGraph.from_record(record['source']),
                              target=MolGraph.from_record(record['target']), steps=steps,
                              reaction_class=record.get('reaction_class'),
                              benzene_counterexamples=record.get('benzene_counterexamples', 0))
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise DataError(f"corrupt sample record: {exc!r}") from exc


class SampleArchiveWriter:

    def __init__(self, path: Union[str, Path], vocab: ActionVocab, config_hash: str, direction: Direction):
        self.path = Path(path)
        self.vocab = vocab
        self.header = {'format': ARCHIVE_FORMAT, 'version': ARCHIVE_VERSION, 'config_hash': config_hash,
                       'direction': direction.value}
        self.count = 0
        self._handle = None

    def __enter__(self) -> 'SampleArchiveWriter':
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._handle = gzip.open(self.path, 'wt', encoding='utf-8')
        self._handle.write(json.dumps(self.header, sort_keys=True) + "\n")
        return self

    def write(self, sample: TrainingSample) -> None:
        self._handle.write(json.dumps(sample_to_record(sample, self.vocab), separators=(',', ':')) + "\n")
        self.count += 1

    def __exit__(self, *exc) -> None:
        self._handle.close()
        logger.info(f"Wrote {self.count} samples to {self.path}")


def read_header(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    try:
        with gzip.open(path, 'rt', encoding='utf-8') as handle:
            header = json.loads(handle.readline())
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"unreadable sample archive: {exc}", path) from exc
    if header.get('format') != ARCHIVE_FORMAT:
        raise DataError("not a sample archive", path)
    if header.get('version') != ARCHIVE_VERSION:
        raise DataError(f"archive version {header.get('version')}, expected {ARCHIVE_VERSION}", path)
    return header


def read_samples(path: Union[str, Path], vocab: ActionVocab,
                 expected_hash: Optional[str] = None) -> Iterator[TrainingSample]:
    path = Path(path)
    header = read_header(path)
    if expected_hash and header.get('config_hash') != expected_hash:
        logger.warning(f"{path}: written under config {header.get('config_hash')}, running under {expected_hash}")
    direction = Direction(header['direction'])
    with gzip.open(path, 'rt', encoding='utf-8') as handle:
        handle.readline()
        for line_number, line in enumerate(handle, start=2):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"invalid JSON: {exc}", path, line_number) from exc
            try:
                yield sample_from_record(record, vocab, direction)
            except DataError as exc:
                raise DataError(str(exc), path, line_number) from exc
