"""
Flat typed config file.

Each non-blank line reads `key: type = value`; `#` starts a comment. Nested
settings use dotted keys:

    direction: str = retro
    ordering: str = bfs-cano
    model.n_a: int = 128
    train.lr0: float = 1e-4
    feature.mark_reactants: bool = true
    ks: list[int] = 1, 3, 5, 10

The declared type must match the setting's type; unknown keys are errors.
"""

import logging
import re
import typing
from dataclasses import fields, is_dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Tuple, Union

from .exceptions import ConfigError
from .run_config import RunConfig

logger = logging.getLogger(__name__)

_LINE = re.compile(r"^(?P<key>[A-Za-z_][\w.]*)\s*:\s*(?P<type>[\w\[\]]+)\s*=\s*(?P<value>.*)$")
_TRUE = {"true", "yes", "1", "on"}
_FALSE = {"false", "no", "0", "off"}


def _type_name(annotation) -> str:
    if annotation is bool:
        return "bool"
    if annotation is int:
        return "int"
    if annotation is float:
        return "float"
    if annotation is str or (isinstance(annotation, type) and issubclass(annotation, Enum)):
        return "str"
    if typing.get_origin(annotation) in (list, typing.List) and typing.get_args(annotation) == (int,):
        return "list[int]"
    return repr(annotation)


def _convert(key: str, type_name: str, text: str) -> Any:
    text = text.strip()
    try:
        if type_name == "int":
            return int(text)
        if type_name == "float":
            return float(text)
        if type_name == "bool":
            lowered = text.lower()
            if lowered in _TRUE:
                return True
            if lowered in _FALSE:
                return False
            raise ValueError(text)
        if type_name == "str":
            return text.strip('"\'')
        if type_name == "list[int]":
            return [int(part) for part in text.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"cannot read '{text}' as {type_name}", key)
    raise ConfigError(f"unsupported type '{type_name}'", key)


def parse_config_text(text: str) -> Dict[str, Tuple[str, Any]]:
    """key -> (declared type, value) for every setting line."""
    settings: Dict[str, Tuple[str, Any]] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        match = _LINE.match(line)
        if match is None:
            raise ConfigError(f"line {number} is not 'key: type = value': {raw.strip()}")
        key, type_name = match.group("key"), match.group("type")
        settings[key] = (type_name, _convert(key, type_name, match.group("value")))
    return settings


def _resolve(config: RunConfig, key: str) -> Tuple[Any, str, Any]:
    """(owner object, attribute name, annotation) for a dotted key."""
    owner: Any = config
    parts = key.split(".")
    for part in parts[:-1]:
        nested = getattr(owner, part, None)
        if not is_dataclass(nested):
            raise ConfigError("unknown setting", key)
        owner = nested
    hints = typing.get_type_hints(type(owner))
    name = parts[-1]
    if name not in {f.name for f in fields(owner)} or is_dataclass(getattr(owner, name)):
        raise ConfigError("unknown setting", key)
    return owner, name, hints[name]


def apply_setting(config: RunConfig, key: str, value: Any, type_name: str = "") -> None:
    owner, name, annotation = _resolve(config, key)
    expected = _type_name(annotation)
    if type_name and type_name != expected:
        raise ConfigError(f"declared as {type_name} but the setting is {expected}", key)
    if isinstance(annotation, type) and issubclass(annotation, Enum):
        try:
            value = annotation(value)
        except ValueError:
            raise ConfigError(f"'{value}' is not one of {[m.value for m in annotation]}", key)
    setattr(owner, name, value)


def load_config_file(path: Union[str, Path], base: RunConfig = None) -> RunConfig:
    """Apply a config file on top of `base` (default settings if omitted) and validate."""
    config = base if base is not None else RunConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    for key, (type_name, value) in parse_config_text(path.read_text(encoding="utf-8")).items():
        apply_setting(config, key, value, type_name)
    logger.info(f"Loaded config file {path}")
    return config


def check_config(config: RunConfig) -> RunConfig:
    ok, message = config.validate()
    if not ok:
        raise ConfigError(message)
    return config
