"""
Command implementations behind `megan preprocess|train|predict|evaluate`.

Every command takes a validated RunConfig and returns a process exit code;
domain errors of single records are counted and logged, never raised.

Usage:
    code = preprocess(["raw_train.csv", "raw_val.csv"], "data/retro", run_config)
    code = train("data/retro", "runs/retro", run_config, resume=False)
    code = predict("runs/retro/best.npz", "raw_test.csv", "runs/retro/test.pred", run_config)
    code = evaluate("runs/retro/test.pred", "raw_test.csv", "runs/retro/eval", run_config, xlsx=True)
"""

import json
import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import pandas as pd
from tqdm import tqdm

from actions.exceptions import InvalidTarget
from actions.vocab import ActionVocab
from chem.exceptions import ChemError
from config.feature_config import FeatureConfig
from config.run_config import RunConfig
from data.exceptions import DataError
from data.prediction_io import ranked_smiles, read_header, read_predictions, write_predictions
from data.reaction_reader import SPLITS, ModelInput, ReactionRecord, ground_truth_key, input_graph, \
    read_model_inputs, read_reactions
from data.sample_archive import SampleArchiveWriter, read_samples
from engine.beam_search import MeganDecoder, Prediction, predict as beam_predict
from engine.statistics import Statistics
from engine.training_engine import TrainingEngine
from features.featurizer import fit_config
from model.bundle import load_model
from model.megan import MeganModel
from oracle.exceptions import OracleError
from oracle.ordering import OrderingPolicy, OrderingStrategy
from oracle.reaction import Direction
from oracle.sequence import TrainingSample, generate_sequence
from oracle.vocab_builder import SequenceStatistics, build_vocab
from utilities.utilities import Utilities

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

METRICS_VERSION = 1
REPORT_VERSION = 1


def archive_path(data_dir: Union[str, Path], split: str) -> Path:
    return Path(data_dir) / f"{split}.samples.jsonl.gz"


def _split_from_name(path: Path) -> str:
    stem = path.stem.lower()
    if "test" in stem:
        return "test"
    if "val" in stem:
        return "valid"
    return "train"


# ---- preprocess ------------------------------------------------------------------


@dataclass
class RecordOutcome:
    index: int
    record_id: str
    split: str
    sample: Optional[TrainingSample] = None
    reason: str = ""
    message: str = ""
    dropped_components: int = 0


def sequence_for_record(job: Tuple[int, ReactionRecord, str, str, int, int]) -> RecordOutcome:
    """Worker entry point; the ordering rng depends only on (seed, record index)."""
    index, record, direction, ordering, seed, max_steps = job
    outcome = RecordOutcome(index, record.id, record.split or "train")
    try:
        reaction = record.to_reaction(Direction(direction))
        outcome.dropped_components = reaction.dropped_components
        policy = OrderingPolicy(OrderingStrategy(ordering), Utilities.record_seed(seed, index))
        outcome.sample = generate_sequence(reaction, policy, max_steps)
    except (ChemError, OracleError, InvalidTarget) as exc:
        outcome.reason = exc.reason
        outcome.message = str(exc)
    except Exception as exc:
        logger.exception(f"{record.id}: unexpected failure")
        outcome.reason = "UnexpectedError"
        outcome.message = repr(exc)
    return outcome


def _run_jobs(function, jobs: Sequence, workers: int, desc: str, show_progress: bool) -> List:
    """Map `function` over jobs in input order, over a process pool when workers > 1."""
    if workers <= 1 or len(jobs) < 2:
        return [function(job) for job in tqdm(jobs, desc=desc, disable=not show_progress)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunk = max(1, len(jobs) // (workers * 8))
        return list(tqdm(pool.map(function, jobs, chunksize=chunk), total=len(jobs), desc=desc,
                         disable=not show_progress))


def _read_inputs(inputs: Iterable[Union[str, Path]]) -> List[ReactionRecord]:
    records: List[ReactionRecord] = []
    for path in map(Path, inputs):
        for record in read_reactions(path):
            if record.split is None:
                record = ReactionRecord(record.id, record.rxn, record.reaction_class, _split_from_name(path))
            elif record.split not in SPLITS:
                raise DataError(f"unknown split '{record.split}' for {record.id}", path)
            records.append(record)
    return records


def preprocess(inputs: Sequence[Union[str, Path]], out_dir: Union[str, Path], run_config: RunConfig,
               show_progress: bool = True) -> int:
    """
    Generate ground-truth action sequences and write one sample archive per
    split, the action vocabulary, the fitted feature config and a report.

    The vocabulary is built from the training split; valid/test sequences that
    use an action outside it are rejected as `UnknownAction`.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    direction = Direction(run_config.direction)
    config_hash = run_config.config_hash()
    records = _read_inputs(inputs)

    logger.info("=" * 60)
    logger.info(f"Preprocessing {len(records)} reactions ({direction.value}, ordering {run_config.ordering}, "
                f"{run_config.workers} workers)")
    logger.info("=" * 60)

    jobs = [(index, record, direction.value, run_config.ordering, run_config.seed, run_config.max_steps)
            for index, record in enumerate(records)]
    outcomes = _run_jobs(sequence_for_record, jobs, run_config.workers, "sequences", show_progress)

    statistics = SequenceStatistics()
    by_split: Dict[str, List[TrainingSample]] = {split: [] for split in SPLITS}
    for outcome in outcomes:
        statistics.dropped_components += outcome.dropped_components
        if outcome.sample is None:
            statistics.reject(outcome.reason)
            logger.warning(f"{outcome.record_id}: rejected ({outcome.reason}) {outcome.message}")
            continue
        by_split[outcome.split].append(outcome.sample)

    vocab = build_vocab(by_split["train"])
    feature_cfg = fit_config(by_split["train"], base=run_config.feature)
    for split in SPLITS:
        kept = []
        for sample in by_split[split]:
            if all(action in vocab for action in sample.actions):
                kept.append(sample)
                statistics.add(sample)
            else:
                statistics.reject("UnknownAction")
                logger.warning(f"{sample.reaction_id}: rejected (UnknownAction) uses an action outside the vocabulary")
        with SampleArchiveWriter(archive_path(out_dir, split), vocab, config_hash, direction) as archive:
            for sample in kept:
                archive.write(sample)

    vocab.save(out_dir / "vocab.txt", config_hash)
    feature_cfg.save(out_dir / "features.json", config_hash)
    _write_report(out_dir, statistics, vocab, feature_cfg, run_config, config_hash)
    statistics.log_summary()
    logger.info(f"Vocabulary: {vocab}")

    if not records:
        logger.error("No reactions in the input; wrote empty archives and a Stop-only vocabulary")
        return EXIT_DATA
    if statistics.acceptance_rate < run_config.min_acceptance:
        logger.error(f"Acceptance {statistics.acceptance_rate:.2%} is below the threshold "
                     f"{run_config.min_acceptance:.2%}")
        return EXIT_DATA
    return EXIT_OK


def _write_report(out_dir: Path, statistics: SequenceStatistics, vocab: ActionVocab, feature_cfg: FeatureConfig,
                  run_config: RunConfig, config_hash: str) -> None:
    report = {
        'format_version': REPORT_VERSION,
        'config_hash': config_hash,
        'run_config': run_config.to_dict(),
        'vocab_size': len(vocab),
        'vocab_counts': vocab.counts(),
        'atom_feature_width': feature_cfg.atom_width,
        'bond_feature_width': feature_cfg.bond_width,
        **statistics.to_dict(),
    }
    (out_dir / "report.json").write_text(json.dumps(report, indent=2), encoding="utf-8")
    frame = statistics.to_frame()
    extra = pd.DataFrame([('vocab', kind, n) for kind, n in vocab.counts().items()] +
                         [('vocab', 'total', len(vocab))], columns=frame.columns)
    with open(out_dir / "report.txt", 'w', encoding='utf-8', newline='\n') as handle:
        handle.write(f"# megan-report v{REPORT_VERSION} config={config_hash}\n")
        pd.concat([frame, extra], ignore_index=True).to_csv(handle, sep='\t', index=False)


# ---- train ------------------------------------------------------------------------


def train(data_dir: Union[str, Path], checkpoint_dir: Union[str, Path], run_config: RunConfig,
          resume: bool = False, show_progress: bool = True) -> int:
    data_dir = Path(data_dir)
    config_hash = run_config.config_hash()
    vocab = ActionVocab.load(data_dir / "vocab.txt")
    feature_cfg = FeatureConfig.load(data_dir / "features.json")
    if feature_cfg.mark_reactants != run_config.feature.mark_reactants:
        logger.warning("feature.mark_reactants differs from the preprocessed feature config; using the latter")

    train_samples = list(read_samples(archive_path(data_dir, "train"), vocab, config_hash))
    valid_path = archive_path(data_dir, "valid")
    val_samples = list(read_samples(valid_path, vocab, config_hash)) if valid_path.exists() else []
    if not train_samples:
        logger.error(f"{data_dir}: no training samples")
        return EXIT_DATA
    if not val_samples:
        logger.warning("No validation samples; validating on the training set")
        val_samples = train_samples

    with Utilities.directory_lock(checkpoint_dir):
        engine = TrainingEngine(run_config, vocab, feature_cfg, train_samples, val_samples, checkpoint_dir,
                                config_hash, show_progress=show_progress)
        with Utilities.timed("Training"):
            best = engine.run(resume=resume)
    logger.info(f"Best checkpoint: {best}")
    return EXIT_OK


# ---- predict ----------------------------------------------------------------------


def predict_one(model: MeganModel, item: ModelInput, direction: Direction, beam_width: int, max_steps: int,
                length_normalization: bool = False, keep_truncated: bool = True) -> Prediction:
    try:
        graph = input_graph(item.text, direction)
    except ChemError as exc:
        logger.warning(f"{item.id}: cannot read input ({exc.reason}) {exc}")
        return Prediction(item.id, item.text, error=exc.reason)
    if graph.num_nodes == 0:
        return Prediction(item.id, item.text, error="EmptyInput")
    reaction_class = item.reaction_class if model.cfg.use_reaction_type else None
    return beam_predict(MeganDecoder(model), graph, beam_width, max_steps, direction, reaction_class,
                        item.id, item.text, length_normalization, keep_truncated)


def predict(checkpoint: Union[str, Path], inputs: Union[str, Path], output: Union[str, Path],
            run_config: RunConfig, beam_width: Optional[int] = None, max_steps: Optional[int] = None,
            show_progress: bool = True) -> int:
    """Beam-search every input with the checkpoint's model; output lines follow input order."""
    loaded = load_model(checkpoint)
    stored = loaded.run_config
    direction = Direction(stored.direction)
    beam_width = beam_width or stored.beam_width
    max_steps = max_steps or stored.max_steps
    items = read_model_inputs(inputs, direction)

    logger.info("=" * 60)
    logger.info(f"Predicting {len(items)} inputs ({direction.value}, beam {beam_width}, max steps {max_steps})")
    logger.info("=" * 60)

    def run(item: ModelInput) -> Prediction:
        return predict_one(loaded.model, item, direction, beam_width, max_steps, stored.length_normalization,
                           stored.keep_truncated)

    with ThreadPoolExecutor(max_workers=run_config.workers) as executor:
        predictions = list(tqdm(executor.map(run, items), total=len(items), desc="predict",
                                disable=not show_progress))

    write_predictions(output, predictions, loaded.config_hash)
    failed = sum(1 for p in predictions if not p.ok)
    empty = sum(1 for p in predictions if p.ok and not p.candidates)
    finished = sum(p.raw_count for p in predictions)
    unique = sum(len(p.candidates) for p in predictions)
    logger.info(f"{len(predictions)} predictions, {failed} unreadable inputs, {empty} without a finished candidate")
    logger.info(f"{finished} finished hypotheses, {unique} unique candidates, "
                f"{sum(p.valence_failures for p in predictions)} valence failures")
    return EXIT_OK


# ---- evaluate ---------------------------------------------------------------------


def truth_for_record(job: Tuple[ReactionRecord, str]) -> Tuple[str, Optional[str], str]:
    record, direction = job
    try:
        return record.id, ground_truth_key(record, Direction(direction)), ""
    except (ChemError, OracleError) as exc:
        return record.id, None, exc.reason


def evaluate(predictions_path: Union[str, Path], truth_path: Union[str, Path], out_dir: Union[str, Path],
             run_config: RunConfig, xlsx: bool = False, show_progress: bool = True) -> int:
    """Join predictions and ground truth by reaction id and write top-k tables."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    config_hash = read_header(predictions_path)["config_hash"] or run_config.config_hash()
    predictions = read_predictions(predictions_path)
    records = read_reactions(truth_path)
    if not records:
        logger.error(f"{truth_path}: no ground-truth reactions")
        return EXIT_DATA

    jobs = [(record, run_config.direction) for record in records]
    results = _run_jobs(truth_for_record, jobs, run_config.workers, "ground truth", show_progress)
    truth: Dict[str, str] = {}
    unscorable: Counter = Counter()
    for record_id, key, reason in results:
        if key is None:
            unscorable[reason] += 1
            logger.warning(f"{record_id}: ground truth unreadable ({reason}); left out")
        else:
            truth[record_id] = key
    missing = sum(1 for record_id in truth if record_id not in predictions)
    if missing:
        logger.warning(f"{missing} ground-truth reactions have no prediction line; counted as misses")

    ranked = ranked_smiles(predictions)
    table = Statistics.top_k_accuracy(ranked, truth, run_config.ks)
    classes = {r.id: r.reaction_class for r in records}
    per_class = Statistics.per_class_accuracy(ranked, truth, classes, run_config.ks)
    summary = Statistics.summary(table, {
        'format_version': METRICS_VERSION,
        'config_hash': config_hash,
        'missing_predictions': missing,
        'prediction_errors': sum(1 for r in truth if r in predictions and not predictions[r].ok),
        'unscorable': sum(unscorable.values()),
    })

    with open(out_dir / "metrics.txt", 'w', encoding='utf-8', newline='\n') as handle:
        handle.write(f"# megan-metrics v{METRICS_VERSION} config={config_hash}\n")
        table.to_csv(handle, sep='\t', index=False, float_format='%.6f')
    (out_dir / "metrics.kv").write_text("".join(f"{k} = {v}\n" for k, v in summary.items()), encoding="utf-8")
    if not per_class.empty:
        with open(out_dir / "per_class.txt", 'w', encoding='utf-8', newline='\n') as handle:
            handle.write(f"# megan-metrics v{METRICS_VERSION} config={config_hash}\n")
            per_class.to_csv(handle, sep='\t', index=False, float_format='%.6f')
    if xlsx:
        with pd.ExcelWriter(out_dir / "metrics.xlsx", engine='xlsxwriter') as writer:
            table.to_excel(writer, sheet_name='Top-k', index=False)
            if not per_class.empty:
                per_class.to_excel(writer, sheet_name='Per class', index=False)
            pd.DataFrame(list(summary.items()), columns=['key', 'value']).to_excel(
                writer, sheet_name='Summary', index=False)

    logger.info("=" * 60)
    for row in table.itertuples(index=False):
        logger.info(f"top-{row.k}: {row.top_k:.2%} ({row.hits}/{row.n})")
    logger.info("=" * 60)
    return EXIT_OK
