"""pyseld command-line interface"""
from __future__ import annotations

import os
import sys
from pathlib import Path
from typing import Sequence

import soundfile as sf
import torch

from pyseld.config import load_config
from pyseld.exceptions import DataError, PySeldError
from pyseld.logger import get_modulelogger
from pyseld.utils.general import max_workers

from .commands import COMMANDS, RunContext
from .parser import build_parser
from .provenance import write_inputs

logger = get_modulelogger(__name__)


def run(argv: Sequence[str]) -> Path:
    """Run one command and return its output directory"""

    args = build_parser().parse_args(argv)

    config = load_config(args.config)
    if args.seed is not None:
        config = config.with_seed(args.seed)

    # cap torch intra-op threads with the pool
    if os.getenv("PYSELD_MAX_WORKERS") is not None:
        torch.set_num_threads(max_workers())

    output = args.output or Path("runs", args.command)
    output.mkdir(parents=True, exist_ok=True)

    ctx = RunContext(args=args, config=config, output=output)
    if args.config is not None:
        ctx.inputs["config"] = args.config

    logger.info("Running '%s' into '%s'", args.command, output)
    COMMANDS[args.command](ctx)

    write_inputs(output, args.command, argv, ctx.config, ctx.inputs)
    return output


def main(argv: Sequence[str] | None = None) -> int:
    """console entry point, returns the process exit code"""

    argv = list(sys.argv[1:] if argv is None else argv)

    try:
        run(argv)

    except PySeldError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        logger.debug("Traceback:", exc_info=exc)
        return exc.exit_code

    # file system and audio failures outside the wrapped readers
    except (OSError, sf.SoundFileError) as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        logger.debug("Traceback:", exc_info=exc)
        return DataError.exit_code

    return 0


__all__ = ["main", "run"]
