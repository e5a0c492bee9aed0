"""
Training Configuration

Teacher-forced training schedule: linear warmup, plateau decay and early stop.
"""

from dataclasses import dataclass


@dataclass
class TrainConfig:
    """Optimizer and schedule settings"""
    batch_size: int = 4  # reactions per optimizer step
    lr0: float = 1e-4
    warmup_steps: int = 20000  # optimizer steps of linear warmup
    eval_every: int = 20000  # training samples between validation estimates
    eval_subset: int = 2500  # validation samples, chosen once per run
    decay_factor: float = 0.1
    decay_patience: int = 4  # stagnant evaluations before decaying
    stop_patience: int = 8  # stagnant evaluations before stopping
    max_epochs: int = 1000
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0

    @classmethod
    def uspto_50k(cls) -> 'TrainConfig':
        return cls()

    @classmethod
    def smoke(cls) -> 'TrainConfig':
        """Short schedule for the bundled smoke dataset"""
        return cls(batch_size=4, lr0=1e-3, warmup_steps=20, eval_every=100, eval_subset=20, max_epochs=3)

    def validate(self) -> tuple[bool, str]:
        """
        Validate schedule settings.

        Returns:
            Tuple of (is_valid, error_message)
        """
        for name in ('batch_size', 'warmup_steps', 'eval_every', 'eval_subset', 'decay_patience',
                     'stop_patience', 'max_epochs'):
            if getattr(self, name) < 1:
                return False, f"{name} must be positive: {getattr(self, name)}"
        if self.lr0 <= 0:
            return False, f"lr0 must be positive: {self.lr0}"
        if not 0 < self.decay_factor < 1:
            return False, f"decay_factor must lie in (0, 1): {self.decay_factor}"
        if self.stop_patience < self.decay_patience:
            return False, "stop_patience must not be smaller than decay_patience"
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            return False, "Adam betas must lie in [0, 1)"
        return True, ""

    def to_dict(self) -> dict:
        return {
            'batch_size': self.batch_size,
            'lr0': self.lr0,
            'warmup_steps': self.warmup_steps,
            'eval_every': self.eval_every,
            'eval_subset': self.eval_subset,
            'decay_factor': self.decay_factor,
            'decay_patience': self.decay_patience,
            'stop_patience': self.stop_patience,
            'max_epochs': self.max_epochs,
            'beta1': self.beta1,
            'beta2': self.beta2,
            'eps': self.eps,
            'seed': self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'TrainConfig':
        return cls(**data)
