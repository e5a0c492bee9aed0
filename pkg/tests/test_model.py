from dataclasses import replace

import numpy as np
import pytest

from actions.apply import apply_action
from actions.edit_action import ActionTarget, Stop
from actions.vocab import ActionVocab
from chem.stereo import permute_graph
from config.exceptions import ConfigError
from config.feature_config import FeatureConfig
from config.model_config import ModelConfig, Recurrence
from config.run_config import RunConfig
from data.reaction_reader import input_graph
from features.featurizer import featurize
from model.bundle import load_model, save_model
from model.megan import MeganModel, embed, gcn_att_layer, parameter_count, parameter_shapes
from numcore.tensor import Tensor, backward, no_grad
from oracle.reaction import Direction


def test_logits_cover_the_whole_action_space(tiny_model, ester_sample):
    graph = ester_sample.source.add_supernode()
    hidden, log_probs = tiny_model.log_probs(tiny_model.start(graph))
    layout = tiny_model.layout(graph)
    assert hidden.shape == (graph.num_nodes, tiny_model.cfg.n_a)
    assert log_probs.shape == (layout.size,)
    assert np.exp(log_probs.value).sum() == pytest.approx(1.0)


def test_probabilities_stay_normalized_along_a_sequence(tiny_model, ester_sample):
    state = tiny_model.start(ester_sample.source.add_supernode())
    for graph, action, target in ester_sample.states():
        hidden, log_probs = tiny_model.log_probs(state)
        assert log_probs.shape == (tiny_model.layout(graph).size,)
        assert np.exp(log_probs.value).sum() == pytest.approx(1.0)
        if action == Stop():
            break
        state = tiny_model.advance(state, apply_action(graph, action, target).graph, hidden)


BENZYL_ACETATE = "CC(=O)OCc1ccccc1"


def relabelled(graph, rng):
    n = graph.num_nodes
    permutation = np.append(rng.permutation(n - 1), n - 1)
    return permute_graph(graph, permutation.tolist()), permutation


def test_attention_layer_is_permutation_equivariant(tiny_model):
    graph = input_graph(BENZYL_ACETATE, Direction.RETRO).add_supernode()
    cfg, params = tiny_model.cfg, tiny_model.params
    gt = featurize(graph, tiny_model.feature_cfg)
    _, a = embed(gt, params, cfg)
    rng = np.random.default_rng(5)
    h = rng.normal(size=(graph.num_nodes, cfg.n_a))
    expected = gcn_att_layer(Tensor(h), a, gt, params, "enc.0", cfg).value

    for _ in range(50):
        moved, permutation = relabelled(graph, rng)
        old = np.argsort(permutation)
        moved_gt = featurize(moved, tiny_model.feature_cfg)
        _, moved_a = embed(moved_gt, params, cfg)
        out = gcn_att_layer(Tensor(h[old]), moved_a, moved_gt, params, "enc.0", cfg).value
        np.testing.assert_allclose(out, expected[old], rtol=1e-10, atol=1e-12)


def test_isolated_atom_attends_only_to_itself(tiny_model):
    graph = input_graph("C", Direction.RETRO)
    gt = featurize(graph, tiny_model.feature_cfg)
    assert gt.adjacency == ((0,),)
    cfg, params = tiny_model.cfg, tiny_model.params
    h = np.random.default_rng(2).normal(size=(1, cfg.n_a))
    out = gcn_att_layer(Tensor(h), embed(gt, params, cfg)[1], gt, params, "dec.0", cfg).value
    heads = [np.maximum(h @ params[f"dec.0.head{k}.weight"].value + params[f"dec.0.head{k}.bias"].value, 0)
             for k in range(cfg.n_heads)]
    np.testing.assert_allclose(out, np.concatenate(heads, axis=1))


def test_action_distribution_follows_relabelled_atoms(tiny_model):
    graph = input_graph(BENZYL_ACETATE, Direction.RETRO).add_supernode()
    layout = tiny_model.layout(graph)
    _, log_probs = tiny_model.log_probs(tiny_model.start(graph))
    rng = np.random.default_rng(9)

    for _ in range(10):
        moved, permutation = relabelled(graph, rng)
        moved_layout = tiny_model.layout(moved)
        _, moved_log_probs = tiny_model.log_probs(tiny_model.start(moved))
        for slot in range(layout.size):
            action, target = layout.decode(slot)
            if action == Stop():
                mapped = ActionTarget(layout.n_atoms)
            elif target.partner is None:
                mapped = ActionTarget(int(permutation[target.atom]))
            else:
                mapped = ActionTarget.bond(int(permutation[target.atom]), int(permutation[target.partner]))
            assert moved_log_probs.value[moved_layout.encode(action, mapped)] == pytest.approx(
                log_probs.value[slot], abs=1e-10)


def test_initialisation_is_deterministic(vocab, feature_cfg):
    a = MeganModel.create(ModelConfig.tiny(), vocab, feature_cfg, seed=3)
    b = MeganModel.create(ModelConfig.tiny(), vocab, feature_cfg, seed=3)
    c = MeganModel.create(ModelConfig.tiny(), vocab, feature_cfg, seed=4)
    for name, tensor in a.params:
        assert np.array_equal(tensor.value, b.params[name].value)
    assert any(not np.array_equal(t.value, c.params[name].value) for name, t in a.params)


def test_forward_pass_is_deterministic(tiny_model, ester_sample):
    graph = ester_sample.source.add_supernode()
    first = tiny_model.log_probs(tiny_model.start(graph))[1].value
    second = tiny_model.log_probs(tiny_model.start(graph))[1].value
    assert np.array_equal(first, second)


def test_parameter_count_matches_the_shapes(tiny_model, vocab, feature_cfg):
    cfg = ModelConfig.tiny()
    assert tiny_model.parameter_count == parameter_count(cfg, vocab, feature_cfg)
    names = [name for name, _ in parameter_shapes(cfg, vocab, feature_cfg)]
    assert names == tiny_model.params.names
    assert "embed.reaction_type" not in names


def test_wide_preset_is_valid_and_larger(vocab, feature_cfg):
    wide = ModelConfig.wide()
    assert wide.validate()[0]
    assert parameter_count(wide, vocab, feature_cfg) > parameter_count(ModelConfig(), vocab, feature_cfg)


def test_reaction_type_embedding_is_optional(vocab, feature_cfg, ester_sample):
    cfg = ModelConfig.tiny()
    cfg.use_reaction_type = True
    model = MeganModel.create(cfg, vocab, feature_cfg)
    assert model.params["embed.reaction_type"].shape == (10, cfg.n_a)
    graph = ester_sample.source.add_supernode()
    with_class = model.log_probs(model.start(graph, 2))[1].value
    without = model.log_probs(model.start(graph))[1].value
    assert not np.allclose(with_class, without)


def test_encode_previous_recurrence_runs(vocab, feature_cfg, ester_sample):
    cfg = ModelConfig.tiny()
    cfg.recurrence = Recurrence.ENCODE_PREVIOUS
    model = MeganModel.create(cfg, vocab, feature_cfg)
    nll, steps = model.sequence_nll(ester_sample.source, ester_sample.steps)
    assert steps == 3
    assert np.isfinite(nll.item()) and nll.item() > 0


def test_invalid_dimensions_are_rejected(vocab, feature_cfg):
    with pytest.raises(ConfigError):
        MeganModel.create(ModelConfig(n_a=10, n_heads=3), vocab, feature_cfg)


def test_sequence_nll_is_positive_and_counts_steps(tiny_model, ester_sample):
    nll, steps = tiny_model.sequence_nll(ester_sample.source, ester_sample.steps)
    assert steps == len(ester_sample)
    assert nll.item() > 0


def test_no_grad_inference_matches_recorded_pass(tiny_model, ester_sample):
    recorded, _ = tiny_model.sequence_nll(ester_sample.source, ester_sample.steps)
    with no_grad():
        plain, _ = tiny_model.sequence_nll(ester_sample.source, ester_sample.steps)
    assert plain.item() == pytest.approx(recorded.item())
    assert not plain.requires_grad


GRADIENT_CONFIG = ModelConfig.tiny()
PARAMETER_NAMES = [name for name, _ in parameter_shapes(GRADIENT_CONFIG, ActionVocab(), FeatureConfig())]


@pytest.mark.parametrize("recurrence", list(Recurrence))
@pytest.mark.parametrize("name", PARAMETER_NAMES)
def test_sequence_nll_gradient_matches_finite_differences(vocab, feature_cfg, ester_sample, name, recurrence):
    model = MeganModel.create(replace(GRADIENT_CONFIG, recurrence=recurrence), vocab, feature_cfg, seed=0)

    def loss() -> float:
        return model.sequence_nll(ester_sample.source, ester_sample.steps)[0].item()

    nll, _ = model.sequence_nll(ester_sample.source, ester_sample.steps)
    backward(nll)
    analytic = model.params.grads()[name].reshape(-1)

    flat = model.params[name].value.reshape(-1)
    rng = np.random.default_rng(0)
    picked = rng.choice(flat.size, size=min(flat.size, 6), replace=False)
    eps = 1e-5
    numeric = []
    for k in picked:
        original = flat[k]
        flat[k] = original + eps
        up = loss()
        flat[k] = original - eps
        down = loss()
        flat[k] = original
        numeric.append((up - down) / (2 * eps))
    np.testing.assert_allclose(analytic[picked], numeric, rtol=1e-4, atol=1e-8)


def test_gradients_reach_the_encoder_and_embeddings(tiny_model, samples):
    for sample in samples[:4]:
        nll, _ = tiny_model.sequence_nll(sample.source, sample.steps)
        backward(nll)
    grads = tiny_model.params.grads()
    assert all(np.all(np.isfinite(g)) for g in grads.values())
    assert np.any(grads["enc.0.att.weight"] != 0)
    assert np.any(grads["embed.atom.weight"] != 0)


def test_model_bundle_round_trip(tmp_path, tiny_model, ester_sample):
    run_config = RunConfig.smoke().sync()
    path = save_model(tmp_path / "model.npz", tiny_model, run_config, run_config.config_hash())
    loaded = load_model(path)
    assert loaded.config_hash == run_config.config_hash()
    assert loaded.model.vocab == tiny_model.vocab
    assert loaded.model.feature_cfg == tiny_model.feature_cfg
    graph = ester_sample.source.add_supernode()
    expected = tiny_model.log_probs(tiny_model.start(graph))[1].value
    actual = loaded.model.log_probs(loaded.model.start(graph))[1].value
    assert np.array_equal(expected, actual)
