# engine/__init__.py
from .beam_search import BeamHypothesis, MeganDecoder, Prediction, RankedCandidate, beam_search, candidate_key, predict
from .lr_schedule import LRSchedule, ScheduleDecision, ScheduleState
from .statistics import Statistics
from .training_engine import TrainingEngine, TrainingProgress, TrainingState, batch_loss, evaluate_nll

__all__ = [
    'TrainingEngine',
    'TrainingProgress',
    'TrainingState',
    'batch_loss',
    'evaluate_nll',
    'LRSchedule',
    'ScheduleDecision',
    'ScheduleState',
    'beam_search',
    'predict',
    'candidate_key',
    'BeamHypothesis',
    'MeganDecoder',
    'Prediction',
    'RankedCandidate',
    'Statistics',
]
