"""inputs manifest of a command run"""
from __future__ import annotations

import os
from pathlib import Path
from typing import Mapping, Sequence

import yaml

from pyseld.config import ExperimentConfig
from pyseld.utils.general import file_sha256

INPUTS_FILE = "inputs.yaml"


def write_inputs(
    output: str | os.PathLike,
    command: str,
    argv: Sequence[str],
    config: ExperimentConfig,
    inputs: Mapping[str, str | os.PathLike],
) -> Path:
    """Write the config echo, seed and input hashes of a run.

    Return
    ------
    path : Path
        Written inputs.yaml."""

    path = Path(output).joinpath(INPUTS_FILE)
    content = {
        "command": command,
        "argv": list(argv),
        "seed": config.seed,
        "inputs": {
            name: {"path": Path(file).as_posix(), "sha256": file_sha256(file)}
            for name, file in sorted(inputs.items())
        },
        "config": config.to_dict(),
    }

    with open(path, mode="w", encoding="utf-8") as file:
        yaml.safe_dump(content, file, sort_keys=False)

    return path
