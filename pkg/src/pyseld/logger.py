"""package logging: one file log per process and a console stream"""
from __future__ import annotations

import logging
import os
import shutil
from pathlib import Path

from pyseld import __package__ as _PACKAGE_

LOG_FORMAT = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"
LOG_DATEFMT = "%Y-%m-%d %H:%M"


def _package_path(package: str, start: str | os.PathLike) -> Path:
    """directory of the named package above start"""

    for path in Path(start).resolve().parents:
        if path.name == package:
            return path

    raise ModuleNotFoundError(f"Could not find '{package}' above '{start}'")


def _create_mainlogger(package: str, logroot: Path, stream_level: str) -> logging.Logger:
    """DEBUG file handler under logroot/logs, skipped when not writable"""

    logger = logging.getLogger(package)
    logger.setLevel(logging.DEBUG)

    formatter = logging.Formatter(LOG_FORMAT, datefmt=LOG_DATEFMT)

    try:
        logdir = logroot.joinpath("logs")
        logdir.mkdir(parents=True, exist_ok=True)

        file_handler = logging.FileHandler(logdir.joinpath(f"{package}.log"), mode="w+")
        file_handler.setFormatter(formatter)
        file_handler.setLevel(logging.DEBUG)
        logger.addHandler(file_handler)

    # read-only install
    except OSError:
        pass

    stream_handler = logging.StreamHandler()
    stream_handler.setLevel(stream_level.upper())
    logger.addHandler(stream_handler)

    return logger


def get_modulelogger(name: str) -> logging.Logger:
    """child logger of the package logger"""

    if name not in _moduleloggers:
        _moduleloggers[name] = logging.getLogger(name)

    return _moduleloggers[name]


def export_logfile(dst: str | os.PathLike | None = None) -> None:
    """Copy the log file of this process to dst,
    defaults to current working directory."""

    shutil.copy(_LOGFILE_, Path.cwd() if dst is None else dst)


# package globals
_PACKAGEPATH_ = _package_path(_PACKAGE_, __file__)

# logger globals
_LOGROOT_ = Path(os.getenv("PYSELD_LOGDIR", _PACKAGEPATH_))
_LOGFILE_ = _LOGROOT_.joinpath(f"logs/{_PACKAGE_}.log").as_posix()

_MAINLOGGER = _create_mainlogger(_PACKAGE_, _LOGROOT_, os.getenv("PYSELD_LOGLEVEL", "WARNING"))
_moduleloggers: dict[str, logging.Logger] = {}
