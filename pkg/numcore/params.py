"""
Learnable parameters and the Adam optimizer.

Usage:
    store = ParamStore()
    w = store.add("layer0.weight", np.zeros((4, 3)))
    ...
    backward(loss)
    adam = Adam(store)
    adam.step(lr=1e-4)
    store.zero_grad()
"""

import logging
from collections import OrderedDict
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from .exceptions import ShapeMismatch
from .tensor import Tensor

logger = logging.getLogger(__name__)


class ParamStore:
    """Name -> parameter tensor, in insertion order."""

    def __init__(self):
        self._params: 'OrderedDict[str, Tensor]' = OrderedDict()

    def add(self, name: str, value: np.ndarray) -> Tensor:
        if name in self._params:
            raise KeyError(f"parameter {name} already exists")
        tensor = Tensor(np.array(value), requires_grad=True, name=name)
        self._params[name] = tensor
        return tensor

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __iter__(self) -> Iterator[Tuple[str, Tensor]]:
        return iter(self._params.items())

    def __len__(self) -> int:
        return len(self._params)

    @property
    def names(self) -> List[str]:
        return list(self._params)

    @property
    def total_size(self) -> int:
        return int(sum(t.size for t in self._params.values()))

    def zero_grad(self) -> None:
        for tensor in self._params.values():
            tensor.zero_grad()

    def grads(self) -> Dict[str, np.ndarray]:
        """Current gradients; parameters the loss never reached get zeros."""
        return {name: t.grad if t.grad is not None else np.zeros_like(t.value) for name, t in self._params.items()}

    def arrays(self) -> Dict[str, np.ndarray]:
        return {name: t.value for name, t in self._params.items()}

    def load_arrays(self, arrays: Dict[str, np.ndarray]) -> None:
        missing = set(self._params) - set(arrays)
        extra = set(arrays) - set(self._params)
        if missing or extra:
            raise KeyError(f"parameter names differ: missing {sorted(missing)}, unexpected {sorted(extra)}")
        for name, tensor in self._params.items():
            value = arrays[name]
            if value.shape != tensor.shape:
                raise ShapeMismatch(f"load {name}", value.shape, tensor.shape)
            tensor.value = np.ascontiguousarray(value.astype(tensor.dtype, copy=True))

    def clone(self) -> 'ParamStore':
        copy = ParamStore()
        for name, tensor in self._params.items():
            copy.add(name, tensor.value.copy())
        return copy

    def summary(self) -> str:
        return f"{len(self)} tensors, {self.total_size:,} parameters"


class Adam:
    """Adam with bias correction; moments are kept per parameter name."""

    def __init__(self, params: ParamStore, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: Dict[str, np.ndarray] = {name: np.zeros_like(p.value) for name, p in params}
        self.v: Dict[str, np.ndarray] = {name: np.zeros_like(p.value) for name, p in params}

    def step(self, lr: float, grads: Optional[Dict[str, np.ndarray]] = None) -> None:
        grads = self.params.grads() if grads is None else grads
        self.t += 1
        correction1 = 1.0 - self.beta1 ** self.t
        correction2 = 1.0 - self.beta2 ** self.t
        for name, param in self.params:
            g = grads[name]
            if g.shape != param.shape:
                raise ShapeMismatch(f"adam {name}", g.shape, param.shape)
            # moments keep the parameter dtype
            g = np.asarray(g, dtype=param.dtype)
            m = self.m[name] = self.beta1 * self.m[name] + (1.0 - self.beta1) * g
            v = self.v[name] = self.beta2 * self.v[name] + (1.0 - self.beta2) * g * g
            update = lr * (m / correction1) / (np.sqrt(v / correction2) + self.eps)
            param.value = (param.value - update).astype(param.dtype)

    def state(self) -> Tuple[int, Dict[str, np.ndarray], Dict[str, np.ndarray]]:
        return self.t, self.m, self.v

    def load_state(self, t: int, m: Dict[str, np.ndarray], v: Dict[str, np.ndarray]) -> None:
        self.t = int(t)
        for name, param in self.params:
            self.m[name] = m[name].astype(param.dtype, copy=True)
            self.v[name] = v[name].astype(param.dtype, copy=True)


def adam_step(params: ParamStore, optimizer: Adam, lr: float, grads: Optional[Dict[str, np.ndarray]] = None) -> None:
    """One optimizer update of `params` with the moments held by `optimizer`."""
    if optimizer.params is not params:
        raise ValueError("optimizer was built for a different parameter store")
    optimizer.step(lr, grads)
