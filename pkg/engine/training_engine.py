"""
Teacher-forced training of the MEGAN network.

Every sample contributes the summed negative log-likelihood of its ground-truth
actions; a batch is optimised on the mean NLL per step. The validation NLL is
estimated on a fixed, seed-chosen subset every `eval_every` training samples
and drives the learning-rate schedule and early stopping. `last.npz` and
`best.npz` are written to the checkpoint directory at every evaluation.

Usage:
    engine = TrainingEngine(run_cfg, vocab, feature_cfg, train_samples, val_samples, "runs/retro", config_hash)
    best = engine.run()
    engine = TrainingEngine(...same arguments...)
    engine.run(resume=True)                      # continues from runs/retro/last.npz
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from tqdm import tqdm

from actions.vocab import ActionVocab
from config.feature_config import FeatureConfig
from config.run_config import RunConfig
from model.bundle import load_model, save_model
from model.megan import MeganModel
from numcore import ops
from numcore.exceptions import NonFiniteLoss
from numcore.params import Adam
from numcore.tensor import Tensor, backward, no_grad
from oracle.sequence import TrainingSample
from utilities.utilities import Utilities

from .lr_schedule import LRSchedule, ScheduleDecision, ScheduleState

logger = logging.getLogger(__name__)


class TrainingState(Enum):
    """State of the training loop"""
    IDLE = "idle"
    RUNNING = "running"
    STOPPED = "stopped"      # early stop
    FINISHED = "finished"    # epoch budget used up
    FAILED = "failed"


@dataclass
class TrainingProgress:
    step: int = 0              # optimizer steps taken
    samples_seen: int = 0
    epoch: int = 0
    cursor: int = 0            # position inside the epoch's sample order
    next_eval: int = 0         # samples_seen value that triggers the next evaluation
    history: List[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> 'TrainingProgress':
        return cls(**data)


def sample_nll(model: MeganModel, sample: TrainingSample) -> tuple:
    return model.sequence_nll(sample.source, sample.steps, sample.reaction_class)


def batch_loss(model: MeganModel, batch: Sequence[TrainingSample]) -> tuple:
    """Mean NLL per step over the batch, and the per-sample summed NLLs."""
    total: Optional[Tensor] = None
    steps = 0
    per_sample = []
    for sample in batch:
        nll, n = sample_nll(model, sample)
        per_sample.append(float(nll.item()))
        total = nll if total is None else ops.add(total, nll)
        steps += n
    return ops.mul(total, 1.0 / steps), per_sample


def evaluate_nll(model: MeganModel, samples: Sequence[TrainingSample]) -> float:
    """Mean NLL per step, without recording anything for backward."""
    if not samples:
        return float('nan')
    total, steps = 0.0, 0
    with no_grad():
        for sample in samples:
            nll, n = sample_nll(model, sample)
            total += float(nll.item())
            steps += n
    return total / steps


class TrainingEngine:

    def __init__(self, run_config: RunConfig, vocab: ActionVocab, feature_cfg: FeatureConfig,
                 train_samples: Sequence[TrainingSample], val_samples: Sequence[TrainingSample],
                 checkpoint_dir: Union[str, Path], config_hash: str, show_progress: bool = True):
        self.run_config = run_config
        self.cfg = run_config.train
        self.vocab = vocab
        self.feature_cfg = feature_cfg
        self.train_samples = list(train_samples)
        self.val_samples = list(val_samples)
        self.checkpoint_dir = Path(checkpoint_dir)
        self.config_hash = config_hash
        self.show_progress = show_progress

        self.model = MeganModel.create(run_config.model, vocab, feature_cfg, seed=self.cfg.seed)
        self.optimizer = Adam(self.model.params, self.cfg.beta1, self.cfg.beta2, self.cfg.eps)
        self.schedule = LRSchedule(self.cfg)
        self.progress = TrainingProgress(next_eval=self.cfg.eval_every)
        self.state = TrainingState.IDLE
        self.val_subset = self._choose_val_subset()

    @property
    def last_path(self) -> Path:
        return self.checkpoint_dir / "last.npz"

    @property
    def best_path(self) -> Path:
        return self.checkpoint_dir / "best.npz"

    def _choose_val_subset(self) -> List[TrainingSample]:
        n = len(self.val_samples)
        size = min(self.cfg.eval_subset, n)
        if size == n:
            return list(self.val_samples)
        chosen = np.sort(np.random.default_rng(self.cfg.seed).choice(n, size=size, replace=False))
        return [self.val_samples[i] for i in chosen]

    def _epoch_order(self, epoch: int) -> np.ndarray:
        return Utilities.record_rng(self.cfg.seed, epoch).permutation(len(self.train_samples))

    # ---- checkpoints ------------------------------------------------------------

    def _training_state(self) -> Dict:
        return {'progress': self.progress.to_dict(), 'schedule': self.schedule.state.to_dict()}

    def _save(self, path: Path) -> None:
        save_model(path, self.model, self.run_config, self.config_hash, self.optimizer, self._training_state())

    def _resume(self) -> None:
        loaded = load_model(self.last_path)
        if loaded.config_hash != self.config_hash:
            logger.warning(f"Resuming a run written under config {loaded.config_hash} with config {self.config_hash}")
        loaded.bundle.restore(self.model.params, self.optimizer)
        state = loaded.training_state
        self.progress = TrainingProgress.from_dict(state['progress'])
        self.schedule = LRSchedule(self.cfg, ScheduleState.from_dict(state['schedule']))
        logger.info(f"Resumed from {self.last_path} at step {self.progress.step}, "
                    f"{self.progress.samples_seen} samples seen")

    # ---- loop ---------------------------------------------------------------------

    def train_step(self, batch: Sequence[TrainingSample]) -> float:
        loss, _ = batch_loss(self.model, batch)
        value = loss.item()
        if not math.isfinite(value):
            ids = ", ".join(s.reaction_id for s in batch)
            raise NonFiniteLoss(value, self.progress.step + 1, f"batch [{ids}]")
        backward(loss)
        self.progress.step += 1
        self.optimizer.step(self.schedule.lr(self.progress.step))
        self.model.params.zero_grad()
        return value

    def _evaluate(self, train_nll: float) -> ScheduleDecision:
        val_nll = evaluate_nll(self.model, self.val_subset)
        decision = self.schedule.observe(val_nll) if math.isfinite(val_nll) else ScheduleDecision.STAGNANT
        entry = {'step': self.progress.step, 'samples': self.progress.samples_seen,
                 'lr': self.schedule.lr(self.progress.step), 'train_nll': train_nll, 'val_nll': val_nll,
                 'stagnant': self.schedule.state.stagnant, 'decision': decision.value}
        self.progress.history.append(entry)
        logger.info(f"step {entry['step']} | samples {entry['samples']} | lr {entry['lr']:.3g} | "
                    f"train NLL {train_nll:.4f} | val NLL {val_nll:.4f} | stagnant evals {entry['stagnant']}")
        self._save(self.last_path)
        if decision is ScheduleDecision.IMPROVED:
            self._save(self.best_path)
        return decision

    def run(self, resume: bool = False) -> Path:
        """Train until early stop or the epoch budget; returns the best checkpoint."""
        if not self.train_samples:
            raise ValueError("no training samples")
        if resume:
            self._resume()
        self.state = TrainingState.RUNNING
        progress = self.progress
        batch_size = self.cfg.batch_size

        logger.info("=" * 60)
        logger.info(f"Training on {len(self.train_samples)} samples, validating on {len(self.val_subset)}")
        logger.info(f"Model: {self.model.params.summary()}")
        logger.info("=" * 60)

        window_loss, window_batches = 0.0, 0
        try:
            while progress.epoch < self.cfg.max_epochs and self.state is TrainingState.RUNNING:
                order = self._epoch_order(progress.epoch)
                starts = range(progress.cursor, len(order), batch_size)
                bar = tqdm(starts, desc=f"epoch {progress.epoch}", disable=not self.show_progress, leave=False)
                for start in bar:
                    batch = [self.train_samples[i] for i in order[start:start + batch_size]]
                    window_loss += self.train_step(batch)
                    window_batches += 1
                    progress.samples_seen += len(batch)
                    progress.cursor = start + len(batch)
                    if progress.cursor >= len(order):
                        progress.epoch += 1
                        progress.cursor = 0
                    if progress.samples_seen >= progress.next_eval:
                        progress.next_eval += self.cfg.eval_every
                        decision = self._evaluate(window_loss / window_batches)
                        window_loss, window_batches = 0.0, 0
                        if decision is ScheduleDecision.STOP:
                            self.state = TrainingState.STOPPED
                            break
                bar.close()
        except NonFiniteLoss:
            self.state = TrainingState.FAILED
            raise

        if self.state is TrainingState.RUNNING:
            self.state = TrainingState.FINISHED
            if window_batches:
                self._evaluate(window_loss / window_batches)
        if not self.best_path.exists():
            self._save(self.best_path)
        logger.info("=" * 60)
        logger.info(f"Training {self.state.value} after {progress.step} steps; "
                    f"best val NLL {self.schedule.state.best:.4f}")
        logger.info("=" * 60)
        return self.best_path
