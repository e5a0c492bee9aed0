"""
Errors raised by the tensor engine.
"""

from typing import Sequence


class NumericError(Exception):
    reason = "NumericError"


class ShapeMismatch(NumericError):
    reason = "ShapeMismatch"

    def __init__(self, op: str, a: Sequence[int], b: Sequence[int]):
        self.op = op
        self.shapes = (tuple(a), tuple(b))
        super().__init__(f"{op}: incompatible shapes {tuple(a)} and {tuple(b)}")


class GraphDetached(NumericError):
    """The loss does not depend on any parameter."""
    reason = "GraphDetached"


class NonFiniteLoss(NumericError):
    reason = "NonFiniteLoss"

    def __init__(self, value: float, step: int = -1, detail: str = ""):
        self.value = value
        self.step = step
        message = f"loss became {value} at step {step}"
        super().__init__(f"{message}: {detail}" if detail else message)
