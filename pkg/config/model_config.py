"""
Model Configuration

Dimensions of the MEGAN network.
"""

from dataclasses import dataclass
from enum import Enum


class Recurrence(Enum):
    """How decoder steps after the first combine the new graph with the previous state"""
    DECODER_ONLY = "decoder-only"  # H_t = dec(max(embed(x_t), H_{t-1}))
    ENCODE_PREVIOUS = "encode-previous"  # P = max(embed(x_t), H_{t-1}); H_t = dec(max(enc(P), P))


@dataclass
class ModelConfig:
    """
    Network dimensions.

    Attributes:
        n_a: atom (node) embedding width
        n_b: bond embedding width
        n_heads: attention heads K; n_a must be divisible by it
        d_att: inner width of the attention projection
        n_h: hidden width of the atom and bond action heads
        n_enc: GCN-att layers in the encoder
        n_dec: GCN-att layers in the decoder
    """
    n_a: int = 128
    n_b: int = 128
    n_heads: int = 8
    d_att: int = 128  # defaults to n_a
    n_h: int = 1024
    n_enc: int = 6
    n_dec: int = 2
    max_steps: int = 16
    direction: str = "retro"
    use_reaction_type: bool = False
    n_reaction_classes: int = 10
    recurrence: Recurrence = Recurrence.DECODER_ONLY
    dtype: str = "float32"  # float64 for gradient checks

    @classmethod
    def uspto_50k(cls) -> 'ModelConfig':
        """Hyperparameters used for the USPTO-50k retro model"""
        return cls()

    @classmethod
    def wide(cls) -> 'ModelConfig':
        """Wide nodes and narrow heads, about 9.9 M parameters on USPTO-50k"""
        return cls(n_a=1024, n_b=128, n_heads=8, d_att=128, n_h=128)

    @classmethod
    def tiny(cls) -> 'ModelConfig':
        """Small network for tests and smoke runs"""
        return cls(n_a=16, n_b=8, n_heads=2, d_att=16, n_h=32, n_enc=2, n_dec=1, dtype="float64")

    @property
    def head_width(self) -> int:
        return self.n_a // self.n_heads

    def validate(self) -> tuple[bool, str]:
        """
        Validate dimensions.

        Returns:
            Tuple of (is_valid, error_message)
        """
        for name in ('n_a', 'n_b', 'n_heads', 'd_att', 'n_h', 'n_enc', 'max_steps'):
            if getattr(self, name) < 1:
                return False, f"{name} must be positive: {getattr(self, name)}"
        if self.n_dec < 1:
            return False, f"n_dec must be positive: {self.n_dec}"
        if self.n_a % self.n_heads:
            return False, f"n_a ({self.n_a}) must be divisible by n_heads ({self.n_heads})"
        if self.direction not in ("retro", "forward"):
            return False, f"Unknown direction: {self.direction}"
        if self.dtype not in ("float32", "float64"):
            return False, f"Unsupported dtype: {self.dtype}"
        return True, ""

    def to_dict(self) -> dict:
        return {
            'n_a': self.n_a,
            'n_b': self.n_b,
            'n_heads': self.n_heads,
            'd_att': self.d_att,
            'n_h': self.n_h,
            'n_enc': self.n_enc,
            'n_dec': self.n_dec,
            'max_steps': self.max_steps,
            'direction': self.direction,
            'use_reaction_type': self.use_reaction_type,
            'n_reaction_classes': self.n_reaction_classes,
            'recurrence': self.recurrence.value,
            'dtype': self.dtype,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'ModelConfig':
        data = dict(data)
        if 'recurrence' in data:
            data['recurrence'] = Recurrence(data['recurrence'])
        return cls(**data)
