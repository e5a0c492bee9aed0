# config/__init__.py
from .exceptions import ConfigError
from .model_config import ModelConfig, Recurrence
from .train_config import TrainConfig
from .feature_config import FeatureConfig
from .run_config import RunConfig
from .config_file import load_config_file, apply_setting, check_config, parse_config_text

__all__ = ['ConfigError', 'ModelConfig', 'Recurrence', 'TrainConfig', 'FeatureConfig', 'RunConfig',
           'load_config_file', 'apply_setting', 'check_config', 'parse_config_text']
