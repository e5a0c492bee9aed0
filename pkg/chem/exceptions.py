"""Errors raised while reading, writing and validating molecular graphs."""


class ChemError(Exception):
    """Base class for molecule-level failures; `reason` feeds preprocessing reports."""
    reason = "ChemError"


class SmilesSyntaxError(ChemError):
    reason = "SyntaxError"

    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}" + (f" in '{text}'" if text else ""))


class ValenceError(ChemError):
    reason = "ValenceError"


class UnsupportedFeatureError(ChemError):
    reason = "UnsupportedFeature"


class AlreadyPresent(ChemError):
    reason = "AlreadyPresent"
