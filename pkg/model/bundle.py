"""
Model checkpoints: parameters and optimizer state plus everything needed to
rebuild the network (configs, action vocabulary, feature value lists).
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

from actions.vocab import ActionVocab
from config.feature_config import FeatureConfig
from config.run_config import RunConfig
from numcore.checkpoint import CheckpointBundle, load_checkpoint, save_checkpoint
from numcore.params import Adam

from .megan import MeganModel, parameter_shapes

logger = logging.getLogger(__name__)


@dataclass
class LoadedModel:
    model: MeganModel
    run_config: RunConfig
    config_hash: str
    training_state: Dict[str, Any] = field(default_factory=dict)
    bundle: Optional[CheckpointBundle] = None


def save_model(path: Union[str, Path], model: MeganModel, run_config: RunConfig, config_hash: str,
               optimizer: Optional[Adam] = None, training_state: Optional[Dict[str, Any]] = None) -> Path:
    meta = {
        'config_hash': config_hash,
        'run_config': run_config.to_dict(),
        'feature_config': model.feature_cfg.to_dict(),
        'vocab': model.vocab.to_lines(),
        'parameter_count': model.parameter_count,
        'training_state': training_state or {},
    }
    return save_checkpoint(Path(path), model.params, optimizer, meta)


def load_model(path: Union[str, Path]) -> LoadedModel:
    bundle = load_checkpoint(Path(path))
    meta = bundle.meta
    run_config = RunConfig.from_dict(meta['run_config'])
    feature_cfg = FeatureConfig.from_dict(meta['feature_config'])
    vocab = ActionVocab.from_lines(meta['vocab'])
    names = [name for name, _ in parameter_shapes(run_config.model, vocab, feature_cfg)]
    if sorted(names) != sorted(bundle.params):
        raise ValueError(f"{path}: stored parameters do not match the stored model config")
    model = MeganModel.create(run_config.model, vocab, feature_cfg, seed=0)
    bundle.restore(model.params)
    logger.info(f"Loaded {path}: {model.params.summary()}, config {meta.get('config_hash')}")
    return LoadedModel(model, run_config, meta.get('config_hash', ""), meta.get('training_state', {}), bundle)
