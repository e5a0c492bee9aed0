"""Errors raised while turning mapped reactions into action sequences."""


class OracleError(Exception):
    """Base class; `reason` is the key preprocessing reports count rejections under."""
    reason = "OracleError"


class MappingError(OracleError):
    reason = "MappingError"


class UnreachableAtoms(OracleError):
    reason = "UnreachableAtoms"

    def __init__(self, atoms):
        self.atoms = sorted(atoms)
        super().__init__(f"target-only atoms {self.atoms} have no path to a mapped atom")


class InternalInconsistency(OracleError):
    reason = "InternalInconsistency"


class SequenceTooLong(OracleError):
    reason = "SequenceTooLong"

    def __init__(self, length: int, limit: int):
        self.length = length
        self.limit = limit
        super().__init__(f"sequence of {length} actions exceeds the limit of {limit}")


class ReconstructionError(OracleError):
    reason = "ReconstructionError"

    def __init__(self, produced: str, expected: str):
        self.produced = produced
        self.expected = expected
        super().__init__(f"replayed sequence gives '{produced}', expected '{expected}'")
