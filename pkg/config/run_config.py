"""
Run Configuration

Everything a preprocess/train/predict run depends on. Its hash is stamped
into every artifact the run writes.
"""

from dataclasses import dataclass, field
from typing import List

from utilities.utilities import Utilities

from .feature_config import FeatureConfig
from .model_config import ModelConfig
from .train_config import TrainConfig

ORDERINGS = ("bfs-rand", "dfs-rand", "bfs-cano", "dfs-cano", "random")
DEFAULT_KS = [1, 3, 5, 10, 20, 50]


@dataclass
class RunConfig:
    """Top-level run settings; nested configs are addressed as model.*, train.*, feature.*"""
    direction: str = "retro"
    ordering: str = "bfs-cano"
    beam_width: int = 50
    max_steps: int = 16
    seed: int = 0
    workers: int = 1  # preprocess processes
    min_acceptance: float = 0.9  # preprocess fails below this accepted fraction
    length_normalization: bool = False  # beam scores: raw cumulative log-prob
    keep_truncated: bool = True  # hypotheses that reach max_steps without Stop still yield candidates
    ks: List[int] = field(default_factory=lambda: list(DEFAULT_KS))
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    feature: FeatureConfig = field(default_factory=FeatureConfig)

    @classmethod
    def retro_uspto_50k(cls) -> 'RunConfig':
        return cls()

    @classmethod
    def forward_uspto_mit(cls) -> 'RunConfig':
        """Forward prediction: 8 steps, beam 20, no stereo features"""
        return cls(direction="forward", beam_width=20, max_steps=8,
                   model=ModelConfig(direction="forward", max_steps=8), feature=FeatureConfig.uspto_mit())

    @classmethod
    def retro_uspto_full(cls) -> 'RunConfig':
        return cls(max_steps=32, model=ModelConfig(max_steps=32))

    @classmethod
    def smoke(cls) -> 'RunConfig':
        return cls(beam_width=5, model=ModelConfig.tiny(), train=TrainConfig.smoke())

    def sync(self) -> 'RunConfig':
        """Propagate run-level settings into the nested model config."""
        self.model.direction = self.direction
        self.model.max_steps = self.max_steps
        self.train.seed = self.seed
        return self

    def validate(self) -> tuple[bool, str]:
        """
        Validate this config and every nested config.

        Returns:
            Tuple of (is_valid, error_message)
        """
        if self.direction not in ("retro", "forward"):
            return False, f"direction: unknown value {self.direction}"
        if self.ordering not in ORDERINGS:
            return False, f"ordering: unknown value {self.ordering} (choose from {', '.join(ORDERINGS)})"
        if self.beam_width < 1:
            return False, f"beam_width: must be at least 1, got {self.beam_width}"
        if self.max_steps < 1:
            return False, f"max_steps: must be at least 1, got {self.max_steps}"
        if self.workers < 1:
            return False, f"workers: must be at least 1, got {self.workers}"
        if not 0 <= self.min_acceptance <= 1:
            return False, f"min_acceptance: must lie in [0, 1], got {self.min_acceptance}"
        if not self.ks or any(k < 1 for k in self.ks):
            return False, "ks: must be a non-empty list of positive integers"
        for prefix, nested in (('model', self.model), ('train', self.train), ('feature', self.feature)):
            ok, message = nested.validate()
            if not ok:
                return False, f"{prefix}.{message}"
        return True, ""

    def to_dict(self) -> dict:
        return {
            'direction': self.direction,
            'ordering': self.ordering,
            'beam_width': self.beam_width,
            'max_steps': self.max_steps,
            'seed': self.seed,
            'workers': self.workers,
            'min_acceptance': self.min_acceptance,
            'length_normalization': self.length_normalization,
            'keep_truncated': self.keep_truncated,
            'ks': list(self.ks),
            'model': self.model.to_dict(),
            'train': self.train.to_dict(),
            'feature': self.feature.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'RunConfig':
        data = dict(data)
        model = ModelConfig.from_dict(data.pop('model', {}))
        train = TrainConfig.from_dict(data.pop('train', {}))
        feature = FeatureConfig.from_dict(data.pop('feature', {}))
        return cls(model=model, train=train, feature=feature, **data)

    def config_hash(self) -> str:
        """First 16 hex chars of sha256 over the canonical JSON form; `workers` does not change results."""
        payload = self.to_dict()
        payload.pop('workers')
        return Utilities.stable_hash(payload)
