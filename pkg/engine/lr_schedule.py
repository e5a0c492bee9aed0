"""
Learning-rate schedule: linear warmup, decay on a validation plateau, early stop.

Usage:
    schedule = LRSchedule(train_cfg)
    lr = schedule.lr(step)
    decision = schedule.observe(val_nll)
    if decision is ScheduleDecision.STOP:
        ...
"""

import logging
from dataclasses import asdict, dataclass
from enum import Enum

from config.train_config import TrainConfig

logger = logging.getLogger(__name__)


class ScheduleDecision(Enum):
    """Outcome of one validation estimate"""
    IMPROVED = "improved"
    STAGNANT = "stagnant"
    DECAYED = "decayed"
    STOP = "stop"


@dataclass
class ScheduleState:
    best: float = float('inf')
    stagnant: int = 0      # evaluations since the best one
    plateau: int = 0       # evaluations since the best one or the last decay
    scale: float = 1.0     # product of applied decays
    evaluations: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> 'ScheduleState':
        return cls(**data)


class LRSchedule:

    def __init__(self, cfg: TrainConfig, state: ScheduleState = None):
        self.cfg = cfg
        self.state = state if state is not None else ScheduleState()

    def lr(self, step: int) -> float:
        """Rate for optimizer step `step` (1-based); rises linearly from 0 to lr0 over the warmup."""
        warmup = min(step, self.cfg.warmup_steps) / self.cfg.warmup_steps if self.cfg.warmup_steps else 1.0
        return self.cfg.lr0 * warmup * self.state.scale

    def observe(self, val_loss: float) -> ScheduleDecision:
        state = self.state
        state.evaluations += 1
        if val_loss < state.best:
            state.best = val_loss
            state.stagnant = 0
            state.plateau = 0
            return ScheduleDecision.IMPROVED

        state.stagnant += 1
        state.plateau += 1
        if state.stagnant >= self.cfg.stop_patience:
            logger.info(f"Validation loss has not improved for {state.stagnant} evaluations, stopping")
            return ScheduleDecision.STOP
        if state.plateau >= self.cfg.decay_patience:
            state.scale *= self.cfg.decay_factor
            state.plateau = 0
            logger.info(f"Decaying learning rate to {self.cfg.lr0 * state.scale:.3g}")
            return ScheduleDecision.DECAYED
        return ScheduleDecision.STAGNANT
