# features/__init__.py
from .featurizer import GraphTensors, featurize, decode_tensors, fit_config

__all__ = ['GraphTensors', 'featurize', 'decode_tensors', 'fit_config']
