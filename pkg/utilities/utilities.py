import hashlib
import json
import logging
import os
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator, Union

import numpy as np

logger = logging.getLogger(__name__)


class LockError(RuntimeError):
    reason = "LockError"


class Utilities:

    @staticmethod
    def record_seed(seed: int, index: int) -> int:
        """Seed for record `index` of a run seeded with `seed`; independent of how records are split over workers."""
        return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])

    @staticmethod
    def record_rng(seed: int, index: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([seed, index]))

    @staticmethod
    def stable_hash(payload: Any, length: int = 16) -> str:
        text = json.dumps(payload, sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(text.encode('utf-8')).hexdigest()[:length]

    @staticmethod
    @contextmanager
    def directory_lock(directory: Union[str, Path]) -> Iterator[Path]:
        """Exclusive writer lock on a directory; a second writer fails instead of waiting."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        lock = directory / ".lock"
        try:
            fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise LockError(f"{directory} is locked by another writer (remove {lock} if it is stale)") from None
        try:
            os.write(fd, str(os.getpid()).encode())
            os.close(fd)
            yield lock
        finally:
            lock.unlink(missing_ok=True)

    @staticmethod
    @contextmanager
    def timed(label: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            logger.info(f"{label} took {time.perf_counter() - start:.2f}s")
