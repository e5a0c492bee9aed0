from itertools import product

import numpy as np
import pytest

from config.run_config import RunConfig
from config.train_config import TrainConfig
from data.reaction_reader import input_graph
from engine.beam_search import MeganDecoder, beam_search, candidate_key, predict
from engine.lr_schedule import LRSchedule, ScheduleDecision, ScheduleState
from engine.statistics import Statistics
from engine.training_engine import TrainingEngine, TrainingState, batch_loss, evaluate_nll
from numcore.exceptions import NonFiniteLoss
from oracle.reaction import Direction

A, B, STOP = 0, 1, 2


class TableDecoder:
    """Three slots (A, B, Stop) with probabilities that depend on the prefix."""

    TABLE = {
        (): [0.6, 0.3, 0.1],
        (A,): [0.4, 0.35, 0.25],
        (B,): [0.025, 0.025, 0.95],
    }
    DEEP = [0.01, 0.01, 0.98]

    def __init__(self):
        self.calls = 0

    def log_probs(self, state):
        self.calls += 1
        return np.log(np.array(self.TABLE.get(state, self.DEEP))), None

    def advance(self, state, slot, carry):
        return state + (slot,), slot == STOP

    def sequence_log_prob(self, slots):
        total = 0.0
        for k, slot in enumerate(slots):
            total += float(self.log_probs(tuple(slots[:k]))[0][slot])
        return total


# ---- schedule ----------------------------------------------------------------------


def test_warmup_is_linear():
    schedule = LRSchedule(TrainConfig())
    assert schedule.lr(10000) == pytest.approx(5e-5)
    assert schedule.lr(20000) == pytest.approx(1e-4)
    assert schedule.lr(50000) == pytest.approx(1e-4)


def test_plateau_decays_then_stops():
    schedule = LRSchedule(TrainConfig())
    assert schedule.observe(1.0) is ScheduleDecision.IMPROVED
    decisions = [schedule.observe(2.0) for _ in range(8)]
    assert decisions[:3] == [ScheduleDecision.STAGNANT] * 3
    assert decisions[3] is ScheduleDecision.DECAYED
    assert decisions[4:7] == [ScheduleDecision.STAGNANT] * 3
    assert decisions[7] is ScheduleDecision.STOP
    assert schedule.lr(50000) == pytest.approx(1e-5)


def test_improvement_resets_both_counters():
    schedule = LRSchedule(TrainConfig())
    schedule.observe(1.0)
    for _ in range(3):
        schedule.observe(1.5)
    assert schedule.observe(0.5) is ScheduleDecision.IMPROVED
    assert schedule.state.stagnant == 0 and schedule.state.plateau == 0
    assert schedule.state.best == 0.5


def test_schedule_state_round_trips():
    schedule = LRSchedule(TrainConfig())
    for value in (1.0, 2.0, 2.0):
        schedule.observe(value)
    restored = ScheduleState.from_dict(schedule.state.to_dict())
    assert restored == schedule.state


# ---- beam search -----------------------------------------------------------------


def test_width_one_is_greedy():
    hypotheses = beam_search(TableDecoder(), (), width=1, max_steps=3)
    assert hypotheses[0].slots == (A, A, STOP)
    assert hypotheses[0].finished


def test_wider_beam_finds_the_better_sequence():
    decoder = TableDecoder()
    hypotheses = beam_search(decoder, (), width=3, max_steps=3)
    best = hypotheses[0]
    assert best.slots == (B, STOP)
    assert best.log_prob == pytest.approx(np.log(0.3 * 0.95))
    scores = [h.log_prob for h in hypotheses]
    assert scores == sorted(scores, reverse=True)


def test_wide_beam_agrees_with_exhaustive_search():
    decoder = TableDecoder()
    finished = []
    for length in range(1, 4):
        for prefix in product((A, B), repeat=length - 1):
            slots = prefix + (STOP,)
            finished.append((decoder.sequence_log_prob(slots), slots))
    expected = max(finished)
    hypotheses = beam_search(TableDecoder(), (), width=27, max_steps=3)
    best = next(h for h in hypotheses if h.finished)
    assert best.slots == expected[1]
    assert best.log_prob == pytest.approx(expected[0])


def test_hypotheses_without_stop_are_marked_truncated():
    hypotheses = beam_search(TableDecoder(), (), width=3, max_steps=3)
    truncated = [h for h in hypotheses if h.truncated]
    assert truncated and all(not h.finished and len(h.slots) == 3 for h in truncated)


def test_beam_width_must_be_positive():
    with pytest.raises(ValueError):
        beam_search(TableDecoder(), (), width=0, max_steps=3)


def test_length_normalization_favours_longer_sequences():
    plain = beam_search(TableDecoder(), (), width=3, max_steps=3)
    normalized = beam_search(TableDecoder(), (), width=3, max_steps=3, length_normalization=True)
    assert plain[0].slots == (B, STOP)
    assert normalized[0].slots == (A, A, STOP)
    assert normalized[0].log_prob == pytest.approx(np.log(0.6 * 0.4 * 0.98))


def test_predict_returns_unique_ranked_candidates(tiny_model):
    decoder = MeganDecoder(tiny_model)
    graph = input_graph("CC(=O)OC", Direction.RETRO)
    prediction = predict(decoder, graph, width=4, max_steps=4, direction=Direction.RETRO, reaction_id="r1")
    assert prediction.ok and prediction.reaction_id == "r1"
    smiles = prediction.top(10)
    assert len(smiles) == len(set(smiles))
    scores = [c.score for c in prediction.candidates]
    assert scores == sorted(scores, reverse=True)
    assert prediction.raw_count >= len(prediction.candidates) + prediction.valence_failures


def test_truncated_hypotheses_count_as_candidates_unless_disabled(tiny_model):
    graph = input_graph("CC(=O)OC", Direction.RETRO)
    decoder = MeganDecoder(tiny_model)
    hypotheses = beam_search(decoder, decoder.start(graph), 4, 1)
    assert len(hypotheses) == 4
    finished = sum(1 for h in hypotheses if h.finished)

    kept = predict(MeganDecoder(tiny_model), graph, width=4, max_steps=1, direction=Direction.RETRO)
    dropped = predict(MeganDecoder(tiny_model), graph, width=4, max_steps=1, direction=Direction.RETRO,
                      keep_truncated=False)
    assert kept.raw_count == 4
    assert dropped.raw_count == finished
    assert len(kept.candidates) + kept.valence_failures <= 4


def test_candidate_key_forward_keeps_the_main_product():
    graph = input_graph("CC(=O)NC.Cl", Direction.RETRO)
    assert candidate_key(graph, Direction.FORWARD) == candidate_key(input_graph("CNC(C)=O", Direction.RETRO),
                                                                   Direction.RETRO)


# ---- statistics -------------------------------------------------------------------


PREDICTIONS = {"a": ["x", "y"], "b": ["z", "w"], "c": []}
TRUTH = {"a": "x", "b": "w", "c": "q", "d": "v"}


def test_first_hit_ranks():
    assert Statistics.first_hit_ranks(PREDICTIONS, TRUTH) == {"a": 1, "b": 2, "c": 0, "d": 0}


def test_top_k_counts_missing_predictions_as_misses():
    table = Statistics.top_k_accuracy(PREDICTIONS, TRUTH, [2, 1, 5])
    assert list(table['k']) == [1, 2, 5]
    assert list(table['hits']) == [1, 2, 2]
    assert list(table['n']) == [4, 4, 4]
    assert table['top_k'].iloc[1] == pytest.approx(0.5)
    assert Statistics.is_monotone(table)


def test_per_class_accuracy_skips_unclassified():
    classes = {"a": 1, "b": 2, "c": 2, "d": None}
    table = Statistics.per_class_accuracy(PREDICTIONS, TRUTH, classes, [1, 2])
    assert sorted(set(table['class'])) == [1, 2]
    row = table[(table['class'] == 2) & (table['k'] == 2)].iloc[0]
    assert row['hits'] == 1 and row['n'] == 2


def test_summary_flattens_the_table():
    table = Statistics.top_k_accuracy(PREDICTIONS, TRUTH, [1, 2])
    summary = Statistics.summary(table, {'config_hash': 'abc'})
    assert summary == {'n': 4, 'top_1': 0.25, 'hits_1': 1, 'top_2': 0.5, 'hits_2': 2, 'config_hash': 'abc'}


def test_empty_truth_gives_zero_accuracy():
    table = Statistics.top_k_accuracy({}, {}, [1])
    assert table['top_k'].iloc[0] == 0.0 and table['n'].iloc[0] == 0


# ---- training ---------------------------------------------------------------------


def smoke_config(max_epochs: int = 1) -> RunConfig:
    config = RunConfig.smoke().sync()
    config.train.max_epochs = max_epochs
    config.train.eval_every = 4
    return config


def test_batch_loss_is_the_mean_per_step(tiny_model, samples):
    batch = samples[:3]
    loss, per_sample = batch_loss(tiny_model, batch)
    steps = sum(len(s) for s in batch)
    assert loss.item() == pytest.approx(sum(per_sample) / steps)
    assert evaluate_nll(tiny_model, batch) == pytest.approx(loss.item())


def test_training_writes_checkpoints(tmp_path, vocab, feature_cfg, samples):
    config = smoke_config()
    engine = TrainingEngine(config, vocab, feature_cfg, samples, samples[:3], tmp_path, config.config_hash(),
                            show_progress=False)
    before = engine.model.params.arrays()["atom_head.out.bias"].copy()
    best = engine.run()
    assert best.exists() and engine.last_path.exists()
    assert engine.state is TrainingState.FINISHED
    assert engine.progress.step == int(np.ceil(len(samples) / config.train.batch_size))
    assert engine.progress.history and np.isfinite(engine.progress.history[-1]['val_nll'])
    assert not np.array_equal(before, engine.model.params["atom_head.out.bias"].value)


def test_resume_continues_where_training_left_off(tmp_path, vocab, feature_cfg, samples):
    config = smoke_config(max_epochs=1)
    first = TrainingEngine(config, vocab, feature_cfg, samples, samples[:3], tmp_path, config.config_hash(),
                           show_progress=False)
    first.run()
    steps = first.progress.step

    config = smoke_config(max_epochs=2)
    second = TrainingEngine(config, vocab, feature_cfg, samples, samples[:3], tmp_path, config.config_hash(),
                            show_progress=False)
    second.run(resume=True)
    assert second.progress.epoch == 2
    assert second.progress.step == 2 * steps
    assert second.progress.samples_seen == 2 * len(samples)


def test_validation_subset_is_fixed_by_the_seed(tmp_path, vocab, feature_cfg, samples):
    config = smoke_config()
    config.train.eval_subset = 4
    subsets = [TrainingEngine(config, vocab, feature_cfg, samples, samples, tmp_path, "h",
                              show_progress=False).val_subset for _ in range(2)]
    assert len(subsets[0]) == 4
    assert [s.reaction_id for s in subsets[0]] == [s.reaction_id for s in subsets[1]]


def test_non_finite_loss_stops_training(tmp_path, vocab, feature_cfg, samples):
    config = smoke_config()
    engine = TrainingEngine(config, vocab, feature_cfg, samples, samples[:3], tmp_path, "h", show_progress=False)
    engine.model.params["atom_head.out.bias"].value[:] = np.nan
    with pytest.raises(NonFiniteLoss):
        engine.train_step(samples[:2])
