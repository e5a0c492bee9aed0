"""
Checkpoint bundle: parameters, Adam moments and a JSON metadata block in one .npz.

Array keys are `param/<name>`, `adam_m/<name>` and `adam_v/<name>`, stored
little-endian; `adam_t` holds the step counter and `meta` a JSON string.
"""

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from .params import Adam, ParamStore

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT_VERSION = 1


def _little_endian(value: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(value.astype(value.dtype.newbyteorder('<'), copy=False))


@dataclass
class CheckpointBundle:
    params: Dict[str, np.ndarray]
    adam_t: int = 0
    adam_m: Dict[str, np.ndarray] = field(default_factory=dict)
    adam_v: Dict[str, np.ndarray] = field(default_factory=dict)
    meta: Dict[str, Any] = field(default_factory=dict)

    @property
    def has_optimizer_state(self) -> bool:
        return bool(self.adam_m)

    def restore(self, store: ParamStore, optimizer: Optional[Adam] = None) -> None:
        store.load_arrays(self.params)
        if optimizer is not None and self.has_optimizer_state:
            optimizer.load_state(self.adam_t, self.adam_m, self.adam_v)


def save_checkpoint(path: Path, store: ParamStore, optimizer: Optional[Adam] = None,
                    meta: Optional[Dict[str, Any]] = None) -> Path:
    """Write the bundle through a temporary file so a crash never leaves a torn checkpoint."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = {'format_version': CHECKPOINT_FORMAT_VERSION, **(meta or {})}
    arrays = {f"param/{name}": _little_endian(value) for name, value in store.arrays().items()}
    if optimizer is not None:
        t, m, v = optimizer.state()
        arrays.update({f"adam_m/{name}": _little_endian(value) for name, value in m.items()})
        arrays.update({f"adam_v/{name}": _little_endian(value) for name, value in v.items()})
        arrays['adam_t'] = np.asarray(t, dtype='<i8')
    arrays['meta'] = np.asarray(json.dumps(meta, sort_keys=True))

    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, 'wb') as handle:
        np.savez(handle, **arrays)
    os.replace(tmp, path)
    logger.debug(f"Saved checkpoint {path} ({store.summary()})")
    return path


def load_checkpoint(path: Path) -> CheckpointBundle:
    path = Path(path)
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data['meta']))
        bundle = CheckpointBundle(params={}, meta=meta)
        for key in data.files:
            section, _, name = key.partition('/')
            if section == 'param':
                bundle.params[name] = data[key]
            elif section == 'adam_m':
                bundle.adam_m[name] = data[key]
            elif section == 'adam_v':
                bundle.adam_v[name] = data[key]
            elif key == 'adam_t':
                bundle.adam_t = int(data[key])
    version = meta.get('format_version')
    if version != CHECKPOINT_FORMAT_VERSION:
        raise ValueError(f"{path}: checkpoint format {version}, expected {CHECKPOINT_FORMAT_VERSION}")
    return bundle
