"""
Errors raised while reading or writing dataset files.
"""


class DataError(Exception):
    """Corrupt record, unreadable file or format version mismatch."""
    reason = "DataError"

    def __init__(self, message: str, path: str = "", line: int = -1):
        self.path = str(path)
        self.line = line
        where = f"{self.path}:{line}: " if path and line >= 0 else (f"{self.path}: " if path else "")
        super().__init__(f"{where}{message}")
