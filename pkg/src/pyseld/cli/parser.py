"""command-line argument parsing"""
from __future__ import annotations

import argparse
from pathlib import Path
from typing import get_args

from pyseld.types import AttenuationInput, Study


def _common(parser: argparse.ArgumentParser) -> argparse.ArgumentParser:
    """arguments shared by every command"""

    parser.add_argument("--config", type=Path, default=None, help="experiment YAML, bundled micro config by default")
    parser.add_argument("--seed", type=int, default=None, help="seed applied to every config section")
    parser.add_argument("--output", type=Path, default=None, help="output directory, runs/<command> by default")
    parser.add_argument("--data", type=Path, default=None, help="dataset root holding manifest.yaml")

    return parser


def build_parser() -> argparse.ArgumentParser:
    """parser with one subcommand per pipeline stage"""

    parser = argparse.ArgumentParser(
        prog="pyseld",
        description="Environment-adaptive meta-learning for sound event localization and detection",
    )
    commands = parser.add_subparsers(dest="command", required=True, metavar="command")

    _common(commands.add_parser("synth-srir", help="simulate the SRIR bank of every configured room"))

    scenes = _common(commands.add_parser("synth-scenes", help="synthesize labeled FOA scenes and the manifest"))
    scenes.add_argument("--study", choices=get_args(Study), default=None, help="controlled room study preset")
    scenes.add_argument("--rooms", type=int, default=8, help="rooms of the noise-set study")
    scenes.add_argument("--clips", type=int, default=16, help="clips per room of a study")
    scenes.add_argument("--sources", type=int, default=16, help="source positions per room of a study")

    _common(commands.add_parser("train-ei", help="supervised training of the environment-independent model"))

    meta = _common(commands.add_parser("meta-train", help="episodic meta-training"))
    meta.add_argument("--method", choices=["meta", "meta_pp", "env_adaptive"], default=None)
    meta.add_argument("--attenuation-input", choices=get_args(AttenuationInput), default=None)
    meta.add_argument("--init", type=Path, default=None, help="pre-trained model checkpoint")

    adapt = _common(commands.add_parser("adapt", help="adapt a trained model to one environment"))
    adapt.add_argument("--model", type=Path, required=True, help="model checkpoint")
    adapt.add_argument("--env", required=True, help="environment id")
    adapt.add_argument("--steps", type=int, default=None, help="inner steps, meta.inner_steps by default")

    evaluate = _common(commands.add_parser("evaluate", help="room-wise and macro scores of the test rooms"))
    source = evaluate.add_mutually_exclusive_group(required=True)
    source.add_argument("--model", type=Path, help="model checkpoint adapted per room before scoring")
    source.add_argument("--predictions", type=Path, help="directory of predicted label CSVs named by clip id")

    analyze = _common(commands.add_parser("analyze", help="similarity maps, attenuation report and adaptation sweeps"))
    analyze.add_argument("--model", type=Path, required=True, help="model checkpoint")

    return parser
