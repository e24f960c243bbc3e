"""general utilities"""
from __future__ import annotations

import hashlib
import os
from pathlib import Path
from typing import Any, Iterable, Mapping

from pyseld.exceptions import ConfigError


def iterable_to_str(iterable: Iterable[Any]) -> str:
    """transform list to string"""
    return ", ".join(map(str, iterable))


def mapped_floats_to_str(mapping: Mapping[str, float | int], prec: int) -> str:
    """transform mapping to string with rounding of floats"""
    return ", ".join(f"{key}={value:.{prec}f}" for key, value in mapping.items())


def file_sha256(path: str | os.PathLike, chunksize: int = 1 << 20) -> str:
    """hex digest of file contents"""

    digest = hashlib.sha256()
    with open(path, "rb") as file:
        for chunk in iter(lambda: file.read(chunksize), b""):
            digest.update(chunk)

    return digest.hexdigest()


def max_workers(requested: int | None = None) -> int:
    """number of worker threads, capped by PYSELD_MAX_WORKERS"""

    # default to cpu count
    workers = requested or os.cpu_count() or 1

    # apply environment cap
    cap = os.getenv("PYSELD_MAX_WORKERS")
    if cap is not None:
        try:
            workers = min(workers, max(1, int(cap)))
        except ValueError as exc:
            raise ConfigError(f"PYSELD_MAX_WORKERS must be an integer, got '{cap}'") from exc

    return max(1, workers)


def relative_posix(path: str | os.PathLike, root: str | os.PathLike) -> str:
    """posix path of path relative to root"""
    return Path(os.path.relpath(path, root)).as_posix()
