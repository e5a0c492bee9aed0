"""
MEGAN network: graph embeddings, GCN-att encoder/decoder and the action heads.

Usage:
    params = init_params(cfg, vocab, feature_cfg, seed=0)
    model = MeganModel(cfg, vocab, feature_cfg, params)
    state = model.start(graph_with_supernode, reaction_class=None)
    hidden, logits = model.forward_step(state)
    log_probs = ops.log_softmax(logits)          # one distribution over ActionLayout slots

Node rows follow the graph: atoms first, supernode last. Message passing runs
over an edge list (receiver, sender) that includes self loops and supernode
links, so attention for node i is normalised over N(i) with i in N(i).
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from actions.apply import apply_action
from actions.edit_action import ActionTarget, EditAction
from actions.layout import ActionLayout, action_space_layout
from actions.vocab import ActionVocab
from chem.molgraph import MolGraph
from config.exceptions import ConfigError
from config.feature_config import FeatureConfig
from config.model_config import ModelConfig, Recurrence
from features.featurizer import GraphTensors, featurize
from numcore import ops
from numcore.exceptions import ShapeMismatch
from numcore.params import ParamStore
from numcore.tensor import Tensor

logger = logging.getLogger(__name__)


@dataclass
class StepState:
    """Graph at the current step plus the decoder output of the previous one."""
    graph: MolGraph
    tensors: GraphTensors
    previous: Optional[Tensor] = None   # H_{t-1}, rows of the previous graph
    terminated: bool = False


# ---- parameters ----------------------------------------------------------------


def _layer_shapes(prefix: str, cfg: ModelConfig, n_b: int) -> List[Tuple[str, tuple]]:
    shapes = [
        (f"{prefix}.att.weight", (cfg.n_a, cfg.d_att)),
        (f"{prefix}.att.bias", (cfg.d_att,)),
        (f"{prefix}.score.weight", (2 * cfg.d_att + n_b, cfg.n_heads)),
        (f"{prefix}.score.bias", (cfg.n_heads,)),
    ]
    for k in range(cfg.n_heads):
        shapes.append((f"{prefix}.head{k}.weight", (cfg.n_a, cfg.head_width)))
        shapes.append((f"{prefix}.head{k}.bias", (cfg.head_width,)))
    return shapes


def parameter_shapes(cfg: ModelConfig, vocab: ActionVocab, feature_cfg: FeatureConfig) -> List[Tuple[str, tuple]]:
    """Every parameter name with its shape, in creation order."""
    n_atom_actions, n_bond_actions = len(vocab.atom_actions), len(vocab.bond_actions)
    shapes = [
        ("embed.atom.weight", (feature_cfg.atom_width, cfg.n_a)),
        ("embed.atom.bias", (cfg.n_a,)),
        ("embed.bond.weight", (feature_cfg.bond_width, cfg.n_b)),
        ("embed.bond.bias", (cfg.n_b,)),
    ]
    if cfg.use_reaction_type:
        shapes.append(("embed.reaction_type", (cfg.n_reaction_classes, cfg.n_a)))
    for layer in range(cfg.n_enc):
        shapes += _layer_shapes(f"enc.{layer}", cfg, cfg.n_b)
    for layer in range(cfg.n_dec):
        shapes += _layer_shapes(f"dec.{layer}", cfg, cfg.n_b)
    shapes += [
        ("atom_head.hidden.weight", (cfg.n_a, cfg.n_h)),
        ("atom_head.hidden.bias", (cfg.n_h,)),
        # one extra column: the Stop logit, read at the supernode row only
        ("atom_head.out.weight", (cfg.n_h, n_atom_actions + 1)),
        ("atom_head.out.bias", (n_atom_actions + 1,)),
        ("bond_head.hidden.weight", (cfg.n_a, cfg.n_h)),
        ("bond_head.hidden.bias", (cfg.n_h,)),
        ("bond_head.out.weight", (cfg.n_h + cfg.n_b, max(n_bond_actions, 1))),
        ("bond_head.out.bias", (max(n_bond_actions, 1),)),
    ]
    return shapes


def parameter_count(cfg: ModelConfig, vocab: ActionVocab, feature_cfg: FeatureConfig) -> int:
    return int(sum(np.prod(shape) for _, shape in parameter_shapes(cfg, vocab, feature_cfg)))


def init_params(cfg: ModelConfig, vocab: ActionVocab, feature_cfg: FeatureConfig, seed: int = 0) -> ParamStore:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every weight and bias; deterministic given seed."""
    valid, message = cfg.validate()
    if not valid:
        raise ConfigError(message)
    valid, message = feature_cfg.validate()
    if not valid:
        raise ConfigError(message)

    rng = np.random.default_rng(seed)
    dtype = np.dtype(cfg.dtype)
    store = ParamStore()
    fan_in = {}
    for name, shape in parameter_shapes(cfg, vocab, feature_cfg):
        if name.endswith(".weight"):
            fan_in[name[:-len(".weight")]] = shape[0]
            bound = 1.0 / np.sqrt(shape[0])
        elif name.endswith(".bias"):
            bound = 1.0 / np.sqrt(fan_in[name[:-len(".bias")]])
        else:
            bound = 1.0 / np.sqrt(cfg.n_a)
        store.add(name, rng.uniform(-bound, bound, size=shape).astype(dtype))
    logger.info(f"Initialised MEGAN parameters: {store.summary()}")
    return store


# ---- network ---------------------------------------------------------------------


def _linear(x: Tensor, params: ParamStore, prefix: str) -> Tensor:
    return ops.add(ops.matmul(x, params[f"{prefix}.weight"]), params[f"{prefix}.bias"])


def embed(gt: GraphTensors, params: ParamStore, cfg: ModelConfig) -> Tuple[Tensor, Tensor]:
    """(H0: n x n_a, A: n x n x n_b); the reaction-type row is added to the supernode."""
    dtype = np.dtype(cfg.dtype)
    atom_weight, bond_weight = params["embed.atom.weight"], params["embed.bond.weight"]
    if gt.atom_features.shape[1] != atom_weight.shape[0]:
        raise ShapeMismatch("embed atoms", gt.atom_features.shape, atom_weight.shape)
    if gt.bond_features.shape[2] != bond_weight.shape[0]:
        raise ShapeMismatch("embed bonds", gt.bond_features.shape, bond_weight.shape)

    h0 = _linear(Tensor(gt.atom_features.astype(dtype)), params, "embed.atom")
    a = _linear(Tensor(gt.bond_features.astype(dtype)), params, "embed.bond")
    if cfg.use_reaction_type and gt.reaction_class is not None:
        row = ops.gather_rows(params["embed.reaction_type"], [gt.reaction_class - 1])
        supernode = np.zeros((gt.num_nodes, 1), dtype=dtype)
        supernode[-1, 0] = 1
        h0 = ops.add(h0, ops.mul(Tensor(supernode), row))
    return h0, a


def gcn_att_layer(h: Tensor, a: Tensor, gt: GraphTensors, params: ParamStore, prefix: str,
                  cfg: ModelConfig) -> Tensor:
    """One graph-attention layer with bond features in the attention scores."""
    n = gt.num_nodes
    if h.shape != (n, cfg.n_a):
        raise ShapeMismatch(prefix, h.shape, (n, cfg.n_a))
    receivers, senders = gt.edge_index

    projected = ops.relu(_linear(h, params, f"{prefix}.att"))
    bond_rows = ops.gather_rows(ops.reshape(a, (n * n, a.shape[2])), receivers * n + senders)
    pairs = ops.concat([ops.gather_rows(projected, receivers), ops.gather_rows(projected, senders), bond_rows], axis=1)
    scores = _linear(pairs, params, f"{prefix}.score")
    attention = ops.masked_segment_softmax(scores, receivers, n)

    messages = ops.gather_rows(h, senders)
    heads = []
    for k in range(cfg.n_heads):
        weighted = ops.mul(ops.slice_axis(attention, k, k + 1, axis=1), messages)
        pooled = ops.segment_sum(weighted, receivers, n)
        heads.append(ops.relu(_linear(pooled, params, f"{prefix}.head{k}")))
    return ops.concat(heads, axis=1)


def _stack(h: Tensor, a: Tensor, gt: GraphTensors, params: ParamStore, cfg: ModelConfig, part: str,
           depth: int) -> Tensor:
    for layer in range(depth):
        h = gcn_att_layer(h, a, gt, params, f"{part}.{layer}", cfg)
    return h


def encode(h: Tensor, a: Tensor, gt: GraphTensors, params: ParamStore, cfg: ModelConfig) -> Tensor:
    return _stack(h, a, gt, params, cfg, "enc", cfg.n_enc)


def decode(h: Tensor, a: Tensor, gt: GraphTensors, params: ParamStore, cfg: ModelConfig) -> Tensor:
    return _stack(h, a, gt, params, cfg, "dec", cfg.n_dec)


def pad_previous(previous: Tensor, n_nodes: int) -> Tensor:
    """
    Previous decoder rows aligned to the current graph.

    Atoms keep their index, the supernode moves to the last row and atoms added
    since the previous step get zero rows.
    """
    n_prev = previous.shape[0]
    if n_prev > n_nodes:
        raise ShapeMismatch("pad_previous", previous.shape, (n_nodes, previous.shape[1]))
    if n_prev == n_nodes:
        return previous
    zero_row = n_prev
    index = np.full(n_nodes, zero_row, dtype=np.int64)
    index[:n_prev - 1] = np.arange(n_prev - 1)
    index[-1] = n_prev - 1
    extended = ops.concat([previous, Tensor(np.zeros((1, previous.shape[1]), dtype=previous.dtype))], axis=0)
    return ops.gather_rows(extended, index)


def action_logits(h: Tensor, a: Tensor, n_atoms: int, params: ParamStore, n_atom_actions: int,
                  n_bond_actions: int) -> Tensor:
    """Flat logits in ActionLayout order: atom block, pair block, Stop."""
    n = n_atoms + 1
    atom_hidden = ops.relu(_linear(h, params, "atom_head.hidden"))
    atom_out = _linear(atom_hidden, params, "atom_head.out")          # (n, |A| + 1)
    parts = []
    if n_atom_actions and n_atoms:
        atom_block = ops.slice_axis(ops.slice_axis(atom_out, 0, n_atoms, axis=0), 0, n_atom_actions, axis=1)
        parts.append(ops.reshape(atom_block, (n_atoms * n_atom_actions,)))

    if n_bond_actions and n_atoms > 1:
        first, second = np.triu_indices(n_atoms, k=1)   # row-major i < j
        joint = _linear(h, params, "bond_head.hidden")
        summed = ops.add(ops.gather_rows(joint, first), ops.gather_rows(joint, second))
        bond_rows = ops.gather_rows(ops.reshape(a, (n * n, a.shape[2])), first * n + second)
        hidden = ops.relu(ops.concat([summed, bond_rows], axis=1))
        bond_out = _linear(hidden, params, "bond_head.out")             # (pairs, |B|)
        parts.append(ops.reshape(bond_out, (bond_out.shape[0] * n_bond_actions,)))

    stop = ops.reshape(ops.slice_axis(ops.slice_axis(atom_out, n_atoms, n, axis=0), n_atom_actions,
                                      n_atom_actions + 1, axis=1), (1,))
    parts.append(stop)
    return ops.concat(parts, axis=0)


def forward_step(state: StepState, params: ParamStore, cfg: ModelConfig, n_atom_actions: int,
                 n_bond_actions: int) -> Tuple[Tensor, Tensor]:
    """(H_t, flat logits) for the current graph given the previous decoder output."""
    gt = state.tensors
    h0, a = embed(gt, params, cfg)
    if state.previous is None:
        h = decode(encode(h0, a, gt, params, cfg), a, gt, params, cfg)
    else:
        combined = ops.maximum(h0, pad_previous(state.previous, gt.num_nodes))
        if cfg.recurrence is Recurrence.ENCODE_PREVIOUS:
            combined = ops.maximum(encode(combined, a, gt, params, cfg), combined)
        h = decode(combined, a, gt, params, cfg)
    return h, action_logits(h, a, state.graph.num_atoms, params, n_atom_actions, n_bond_actions)


class MeganModel:
    """Configuration, vocabulary, feature encoding and parameters bundled for training and decoding."""

    def __init__(self, cfg: ModelConfig, vocab: ActionVocab, feature_cfg: FeatureConfig, params: ParamStore):
        self.cfg = cfg
        self.vocab = vocab
        self.feature_cfg = feature_cfg
        self.params = params
        self.n_atom_actions = len(vocab.atom_actions)
        self.n_bond_actions = len(vocab.bond_actions)

    @classmethod
    def create(cls, cfg: ModelConfig, vocab: ActionVocab, feature_cfg: FeatureConfig, seed: int = 0) -> 'MeganModel':
        return cls(cfg, vocab, feature_cfg, init_params(cfg, vocab, feature_cfg, seed))

    def layout(self, graph: MolGraph) -> ActionLayout:
        return action_space_layout(self.vocab, graph)

    def start(self, graph: MolGraph, reaction_class: Optional[int] = None) -> StepState:
        return StepState(graph, featurize(graph, self.feature_cfg, reaction_class))

    def advance(self, state: StepState, graph: MolGraph, hidden: Tensor) -> StepState:
        return StepState(graph, featurize(graph, self.feature_cfg, state.tensors.reaction_class), previous=hidden)

    def forward_step(self, state: StepState) -> Tuple[Tensor, Tensor]:
        return forward_step(state, self.params, self.cfg, self.n_atom_actions, self.n_bond_actions)

    def log_probs(self, state: StepState) -> Tuple[Tensor, Tensor]:
        hidden, logits = self.forward_step(state)
        return hidden, ops.log_softmax(logits)

    def sequence_nll(self, source: MolGraph, steps: Sequence[Tuple[EditAction, ActionTarget]],
                     reaction_class: Optional[int] = None) -> Tuple[Tensor, int]:
        """Summed teacher-forced NLL over the steps of one sample, and the number of steps."""
        graph = source if source.has_supernode else source.add_supernode()
        state = self.start(graph, reaction_class)
        total: Optional[Tensor] = None
        for action, target in steps:
            hidden, log_probs = self.log_probs(state)
            slot = self.layout(state.graph).encode(action, target)
            nll = ops.mul(ops.pick(log_probs, slot), -1.0)
            total = nll if total is None else ops.add(total, nll)
            next_graph, terminated = apply_action(state.graph, action, target)
            if terminated:
                break
            state = self.advance(state, next_graph, hidden)
        return total, len(steps)

    @property
    def parameter_count(self) -> int:
        return self.params.total_size
