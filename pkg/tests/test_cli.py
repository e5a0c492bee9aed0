import json

import numpy as np
import pandas as pd
import pytest

from actions.edit_action import Stop
from actions.vocab import ActionVocab
from chem.aromaticity import normalize_hydrogens
from chem.smiles_parser import parse_smiles
from cli.commands import EXIT_DATA, EXIT_OK, archive_path, evaluate, preprocess
from config.run_config import RunConfig
from data.prediction_io import write_predictions
from data.sample_archive import read_header, read_samples
from data.smoke_dataset import smoke_reactions
from engine.beam_search import Prediction, RankedCandidate
from main import main
from oracle.reaction import comparison_smiles

from conftest import AMIDE, ESTER


def key(smiles: str) -> str:
    return comparison_smiles(normalize_hydrogens(parse_smiles(smiles)))


def read_kv(path) -> dict:
    pairs = (line.split(" = ", 1) for line in path.read_text().splitlines() if line)
    return {k: v for k, v in pairs}


def smoke_config() -> RunConfig:
    return RunConfig.smoke().sync()


@pytest.fixture
def truth_csv(tmp_path):
    path = tmp_path / "raw_test.csv"
    path.write_text(f"id,class,rxn\nr1,2,{ESTER}\nr2,2,{AMIDE}\nr3,1,{ESTER}\n")
    return path


@pytest.fixture
def predictions_file(tmp_path):
    path = tmp_path / "test.pred"
    write_predictions(path, [
        Prediction("r1", "CC(=O)OC", [RankedCandidate(key("CC(=O)O.CO"), -0.1), RankedCandidate("CCO", -3.0)]),
        Prediction("r2", "CNC(C)=O", [RankedCandidate("CC(=O)O.CN", -0.5), RankedCandidate(key("CC(=O)Cl.CN"), -0.9)]),
    ], "feedfacefeedface")
    return path


# ---- evaluate -----------------------------------------------------------------------


def test_evaluate_joins_predictions_and_truth_by_id(tmp_path, truth_csv, predictions_file):
    out = tmp_path / "eval"
    assert evaluate(predictions_file, truth_csv, out, smoke_config(), show_progress=False) == EXIT_OK

    summary = read_kv(out / "metrics.kv")
    assert summary['n'] == "3"
    assert summary['hits_1'] == "1" and summary['hits_3'] == "2"
    assert float(summary['top_1']) == pytest.approx(1 / 3, abs=1e-6)
    assert summary['missing_predictions'] == "1"
    assert summary['config_hash'] == "feedfacefeedface"

    assert (out / "metrics.txt").read_text().startswith("# megan-metrics v1 config=feedfacefeedface")
    table = pd.read_csv(out / "metrics.txt", sep="\t", comment="#")
    assert list(table['k']) == RunConfig().ks
    assert np.all(np.diff(table['top_k']) >= 0)


def test_evaluate_reports_accuracy_per_class(tmp_path, truth_csv, predictions_file):
    out = tmp_path / "eval"
    evaluate(predictions_file, truth_csv, out, smoke_config(), xlsx=True, show_progress=False)
    per_class = pd.read_csv(out / "per_class.txt", sep="\t", comment="#")
    assert sorted(set(per_class['class'])) == [1, 2]
    row = per_class[(per_class['class'] == 2) & (per_class['k'] == 1)].iloc[0]
    assert row['hits'] == 1 and row['n'] == 2
    assert (out / "metrics.xlsx").exists()


def test_evaluate_without_truth_rows_is_a_data_error(tmp_path, predictions_file):
    truth = tmp_path / "empty.csv"
    truth.write_text("id,class,rxn\n")
    assert evaluate(predictions_file, truth, tmp_path / "eval", smoke_config(), show_progress=False) == EXIT_DATA


# ---- preprocess ---------------------------------------------------------------------


def test_preprocess_writes_archives_vocab_and_report(tmp_path):
    raw = tmp_path / "raw_train.csv"
    frame = smoke_reactions(seed=0, size=12)
    frame['split'] = 'train'
    frame.to_csv(raw, index=False)
    config = smoke_config()
    out = tmp_path / "data"

    assert preprocess([raw], out, config, show_progress=False) == EXIT_OK
    for name in ("vocab.txt", "features.json", "report.json", "report.txt"):
        assert (out / name).exists()
    assert read_header(archive_path(out, "train"))['config_hash'] == config.config_hash()

    report = json.loads((out / "report.json").read_text())
    assert report['total'] == 12 and report['accepted'] == 12
    assert report['config_hash'] == config.config_hash()
    vocab = ActionVocab.load(out / "vocab.txt")
    assert report['vocab_size'] == len(vocab)
    assert len(list(read_samples(archive_path(out, "train"), vocab))) == 12
    assert list(read_samples(archive_path(out, "test"), vocab)) == []


def test_preprocess_rejects_bad_reactions_and_enforces_acceptance(tmp_path):
    raw = tmp_path / "raw_train.csv"
    raw.write_text(f"id,rxn\nok,{ESTER}\norphan,[CH3:1][OH:2]>>[CH3:1][OH:2].[Cl:9]\n")
    config = smoke_config()
    assert preprocess([raw], tmp_path / "strict", config, show_progress=False) == EXIT_DATA

    config.min_acceptance = 0.5
    assert preprocess([raw], tmp_path / "lenient", config, show_progress=False) == EXIT_OK
    report = json.loads((tmp_path / "lenient" / "report.json").read_text())
    assert report['accepted'] == 1 and sum(report['rejected'].values()) == 1


def test_preprocess_of_an_empty_table_fails_after_writing_empty_outputs(tmp_path):
    raw = tmp_path / "raw_train.csv"
    raw.write_text("id,class,rxn\n")
    out = tmp_path / "data"
    assert preprocess([raw], out, smoke_config(), show_progress=False) == EXIT_DATA

    vocab = ActionVocab.load(out / "vocab.txt")
    assert list(vocab) == [Stop()]
    for split in ("train", "valid", "test"):
        assert list(read_samples(archive_path(out, split), vocab)) == []
    assert json.loads((out / "report.json").read_text())["total"] == 0


# ---- command line -------------------------------------------------------------------


def test_usage_errors_exit_with_status_one():
    with pytest.raises(SystemExit) as info:
        main(["bogus"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main(["train"])
    assert info.value.code == 1


def test_invalid_settings_are_a_usage_error(tmp_path, truth_csv, predictions_file):
    argv = ["evaluate", str(predictions_file), str(truth_csv), "--out", str(tmp_path / "eval"),
            "--preset", "smoke", "--beam", "0", "--quiet"]
    assert main(argv) == 1


def test_missing_input_is_a_data_error(tmp_path):
    argv = ["preprocess", str(tmp_path / "absent.csv"), "--out", str(tmp_path / "data"), "--quiet"]
    assert main(argv) == EXIT_DATA


def test_locked_checkpoint_directory_is_refused(tmp_path):
    raw = tmp_path / "raw_train.csv"
    smoke_reactions(seed=0, size=8).drop(columns="split").to_csv(raw, index=False)
    data = tmp_path / "data"
    assert main(["preprocess", str(raw), "--out", str(data), "--preset", "smoke", "--quiet"]) == EXIT_OK
    runs = tmp_path / "runs"
    runs.mkdir()
    (runs / ".lock").write_text("1")
    assert main(["train", str(data), "--out", str(runs), "--preset", "smoke", "--quiet"]) == EXIT_DATA


@pytest.mark.slow
def test_smoke_pipeline_end_to_end(tmp_path):
    raw = tmp_path / "smoke.csv"
    smoke_reactions(seed=0, size=40).to_csv(raw, index=False)
    data, runs = tmp_path / "data", tmp_path / "runs"
    common = ["--preset", "smoke", "--quiet"]

    assert main(["preprocess", str(raw), "--out", str(data)] + common) == EXIT_OK
    assert main(["train", str(data), "--out", str(runs)] + common) == EXIT_OK
    assert (runs / "best.npz").exists() and (runs / "last.npz").exists()

    predictions = tmp_path / "test.pred"
    assert main(["predict", str(runs / "best.npz"), str(raw), "--out", str(predictions), "--beam", "3"]
                + common) == EXIT_OK
    assert len(predictions.read_text().splitlines()) == 41

    assert main(["evaluate", str(predictions), str(raw), "--out", str(tmp_path / "eval")] + common) == EXIT_OK
    table = pd.read_csv(tmp_path / "eval" / "metrics.txt", sep="\t", comment="#")
    assert table['n'].iloc[0] == 40
    assert np.all(np.diff(table['top_k']) >= 0)
