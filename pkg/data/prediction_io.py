"""
Prediction files.

    # megan-predictions v1 config=<hash>
    <id>\t<input>\t<candidate>|<score>;<candidate>|<score>;...
    <id>\t<input>\t!error:<reason>
"""

import logging
from pathlib import Path
from typing import Dict, Iterable, List, Union

from engine.beam_search import Prediction, RankedCandidate

from .exceptions import DataError

logger = logging.getLogger(__name__)

PREDICTIONS_VERSION = 1
_HEADER = "# megan-predictions v{version} config={config_hash}"
_ERROR = "!error:"


def format_prediction(prediction: Prediction) -> str:
    if prediction.error is not None:
        ranked = f"{_ERROR}{prediction.error}"
    else:
        ranked = ";".join(f"{c.smiles}|{c.score:.6f}" for c in prediction.candidates)
    return f"{prediction.reaction_id}\t{prediction.input}\t{ranked}"


def parse_prediction(line: str) -> Prediction:
    parts = line.rstrip("\n").split("\t")
    if len(parts) != 3:
        raise DataError(f"expected 3 tab-separated fields, got {len(parts)}")
    reaction_id, text, ranked = parts
    if ranked.startswith(_ERROR):
        return Prediction(reaction_id, text, error=ranked[len(_ERROR):])
    candidates = []
    for item in filter(None, ranked.split(";")):
        smiles, _, score = item.rpartition("|")
        try:
            candidates.append(RankedCandidate(smiles, float(score)))
        except ValueError:
            raise DataError(f"bad candidate '{item}'") from None
    return Prediction(reaction_id, text, candidates, raw_count=len(candidates))


def write_predictions(path: Union[str, Path], predictions: Iterable[Prediction], config_hash: str) -> int:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        handle.write(_HEADER.format(version=PREDICTIONS_VERSION, config_hash=config_hash) + "\n")
        for prediction in predictions:
            handle.write(format_prediction(prediction) + "\n")
            count += 1
    logger.info(f"Wrote {count} predictions to {path}")
    return count


def _parse_header(line: str, path: Path) -> Dict[str, str]:
    if not line.startswith("# megan-predictions v"):
        raise DataError("not a predictions file", path, 1)
    fields = line.split()
    version = fields[2][1:]
    if version != str(PREDICTIONS_VERSION):
        raise DataError(f"predictions version {version}, expected {PREDICTIONS_VERSION}", path, 1)
    config_hash = next((f.partition("=")[2] for f in fields[3:] if f.startswith("config=")), "")
    return {"version": version, "config_hash": config_hash}


def read_header(path: Union[str, Path]) -> Dict[str, str]:
    path = Path(path)
    if not path.exists():
        raise DataError("file not found", path)
    with open(path, encoding="utf-8") as handle:
        return _parse_header(handle.readline(), path)


def read_predictions(path: Union[str, Path]) -> Dict[str, Prediction]:
    """Predictions keyed by reaction id; a repeated id keeps its last line."""
    path = Path(path)
    if not path.exists():
        raise DataError("file not found", path)
    predictions: Dict[str, Prediction] = {}
    with open(path, encoding='utf-8') as handle:
        _parse_header(handle.readline(), path)
        for line_number, line in enumerate(handle, start=2):
            if not line.strip():
                continue
            try:
                prediction = parse_prediction(line)
            except DataError as exc:
                raise DataError(str(exc), path, line_number) from exc
            predictions[prediction.reaction_id] = prediction
    return predictions


def ranked_smiles(predictions: Dict[str, Prediction]) -> Dict[str, List[str]]:
    return {reaction_id: [c.smiles for c in p.candidates] for reaction_id, p in predictions.items()}
