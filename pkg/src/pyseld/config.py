"""experiment configuration from YAML"""
from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from pyseld.exceptions import ConfigError
from pyseld.features import FeatureConfig
from pyseld.logger import _PACKAGEPATH_, get_modulelogger
from pyseld.meta import MetaConfig, TrainConfig
from pyseld.model import AttenuationConfig, BackboneConfig, ExtractorConfig
from pyseld.scenes import SynthesisConfig
from pyseld.types import AttenuationInput, Method
from pyseld.utils.structured import from_mapping, to_plain

logger = get_modulelogger(__name__)

MICRO_CONFIG = _PACKAGEPATH_.joinpath("data/micro.yaml")


@dataclass(frozen=True)
class DataConfig:
    """Dataset location and environment split.

    Empty train_envs selects every environment not listed in
    test_envs."""

    root: Path | None = None
    features: FeatureConfig = field(default_factory=FeatureConfig)
    cache: bool = True
    train_envs: tuple[str, ...] = ()
    test_envs: tuple[str, ...] = ()

    def __post_init__(self):

        overlap = set(self.train_envs) & set(self.test_envs)
        if overlap:
            raise ConfigError(f"environments in both train and test split: {sorted(overlap)}")

    def split(self, env_ids: list[str]) -> tuple[list[str], list[str]]:
        """train and test environments of a dataset"""

        unknown = (set(self.train_envs) | set(self.test_envs)) - set(env_ids)
        if unknown:
            raise ConfigError(f"split names environments missing from the dataset: {sorted(unknown)}")

        test = [env for env in env_ids if env in self.test_envs]
        train = [env for env in env_ids if env in self.train_envs] if self.train_envs else [
            env for env in env_ids if env not in self.test_envs
        ]

        return train, test


@dataclass(frozen=True)
class EvaluationConfig:
    """Scoring settings"""

    doa_threshold: float = 20.0
    segment_frames: int = 10
    adapt: bool = True
    workbook: bool = False

    def __post_init__(self):

        if not 0 <= self.doa_threshold <= 180:
            raise ConfigError(f"doa_threshold must lie in [0, 180], got {self.doa_threshold}")

        if self.segment_frames < 1:
            raise ConfigError(f"segment_frames must be positive, got {self.segment_frames}")


@dataclass(frozen=True)
class AnalysisConfig:
    """Similarity maps and adaptation sweeps"""

    steps: tuple[int, ...] = (1, 5, 20, 100)
    shots: tuple[int, ...] = (10, 20, 30)
    k_support: int = 30

    def __post_init__(self):

        if not self.steps or min(self.steps) < 0:
            raise ConfigError(f"sweep steps must be non-negative, got {self.steps}")

        if not self.shots or min(self.shots) < 1:
            raise ConfigError(f"sweep shots must be positive, got {self.shots}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete experiment: synthesis, data, model and training regimes"""

    synthesis: SynthesisConfig = field(default_factory=SynthesisConfig)
    data: DataConfig = field(default_factory=DataConfig)
    model: BackboneConfig = field(default_factory=BackboneConfig)
    extractor: ExtractorConfig = field(default_factory=ExtractorConfig)
    attenuation: AttenuationConfig = field(default_factory=AttenuationConfig)
    training: TrainConfig = field(default_factory=TrainConfig)
    meta: MetaConfig = field(default_factory=MetaConfig)
    evaluation: EvaluationConfig = field(default_factory=EvaluationConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    seed: int | None = None

    def __post_init__(self):

        if self.data.features.fs != self.synthesis.fs:
            raise ConfigError(
                f"feature sample rate {self.data.features.fs} differs from synthesis rate {self.synthesis.fs}"
            )

        if self.model.n_classes != self.synthesis.n_classes:
            raise ConfigError(
                f"model predicts {self.model.n_classes} classes, synthesis draws {self.synthesis.n_classes}"
            )

    def with_seed(self, seed: int) -> ExperimentConfig:
        """same experiment with every section seeded by seed"""

        return replace(
            self,
            seed=seed,
            synthesis=replace(self.synthesis, seed=seed),
            training=replace(self.training, seed=seed),
            meta=replace(self.meta, seed=seed),
        )

    def with_method(
        self,
        method: Method | None = None,
        attenuation_input: AttenuationInput | None = None,
    ) -> ExperimentConfig:
        """same experiment under another training method"""

        changes = {}
        if method is not None:
            changes["method"] = method
        if attenuation_input is not None:
            changes["attenuation_input"] = attenuation_input

        return replace(self, meta=replace(self.meta, **changes))

    def to_dict(self) -> dict:
        """YAML-safe echo of every field"""
        return to_plain(self)


def _resolve(path: Path | None, base: Path) -> Path | None:
    """path relative to the config file"""

    if path is None or path.is_absolute():
        return path

    return base.joinpath(path)


def load_config(path: str | os.PathLike | None = None) -> ExperimentConfig:
    """Read and validate an experiment config.

    Parameters
    ----------
    path : path, default None
        YAML config file, the bundled micro config when None.

    Return
    ------
    config : ExperimentConfig
        Validated config with relative paths resolved against the
        config file directory."""

    path = Path(path) if path is not None else MICRO_CONFIG
    if not path.is_file():
        raise ConfigError(f"config file '{path}' does not exist")

    try:
        with open(path, encoding="utf-8") as file:
            content = yaml.safe_load(file)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file '{path}' is not valid YAML: {exc}") from exc

    config = from_mapping(ExperimentConfig, content)
    config = replace(config, data=replace(config.data, root=_resolve(config.data.root, path.parent)))

    if config.seed is not None:
        config = config.with_seed(config.seed)

    logger.debug("Loaded config '%s'", path)
    return config
