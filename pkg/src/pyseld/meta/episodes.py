"""meta-learning configuration and episode sampling"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from pyseld.exceptions import ConfigError, InsufficientClipsError, PreconditionError
from pyseld.features import FeatureDataset
from pyseld.logger import get_modulelogger
from pyseld.types import AttenuationInput, Method

logger = get_modulelogger(__name__)


@dataclass(frozen=True)
class MetaConfig:
    """Episodic training and adaptation settings"""

    k_support: int = 30
    room_batch: int = 9
    sample_batch: int = 128
    inner_steps: int = 5
    inner_lr: float = 0.001
    meta_lr: float = 0.0003
    epochs: int = 25
    lr_hold: int = 15
    lr_every: int = 5
    lr_gamma: float = 0.9
    weight_decay: float = 0.01
    seed: int = 0
    method: Method = "env_adaptive"
    attenuation_input: AttenuationInput = "representations"
    bypass_attenuation: bool = False
    transductive_bn: bool = True
    threshold: float = 0.5
    workers: int | None = None

    def __post_init__(self):

        if self.k_support >= self.sample_batch:
            raise PreconditionError(f"K={self.k_support} must be smaller than the sample batch {self.sample_batch}")

        if self.inner_steps < 1:
            raise PreconditionError(f"inner loop needs at least one step, got {self.inner_steps}")

        if self.k_support < 1 or self.room_batch < 1 or self.epochs < 0:
            raise ConfigError("k_support and room_batch must be positive, epochs non-negative")


@dataclass(frozen=True, eq=False)
class EpisodeBatch:
    """Disjoint support and query clips of one environment"""

    env_id: str
    support_ids: tuple[str, ...]
    query_ids: tuple[str, ...]
    support: tuple[torch.Tensor, torch.Tensor]
    query: tuple[torch.Tensor, torch.Tensor]

    def __post_init__(self):

        if set(self.support_ids) & set(self.query_ids):
            raise PreconditionError(f"support and query of '{self.env_id}' overlap")

    @classmethod
    def from_ids(cls, dataset: FeatureDataset, env_id: str, support_ids, query_ids) -> EpisodeBatch:
        """materialize features and targets"""

        return cls(
            env_id=env_id,
            support_ids=tuple(support_ids),
            query_ids=tuple(query_ids),
            support=dataset.batch(support_ids),
            query=dataset.batch(query_ids),
        )


def plan_episodes(
    dataset: FeatureDataset,
    config: MetaConfig,
    rng: np.random.Generator,
) -> list[tuple[str, list[str], list[str]]]:
    """Environment permutation with support and query clip ids.

    Environments with fewer clips than the sample batch use all their
    clips, K is preserved."""

    env_ids = dataset.env_ids
    if not env_ids:
        raise PreconditionError("dataset has no environments")

    plan = []
    for pick in rng.permutation(len(env_ids)):

        env_id = env_ids[pick]
        clip_ids = dataset.clip_ids(env_id)

        batch = config.sample_batch
        if len(clip_ids) < batch:
            logger.warning("Environment '%s' holds %d clips, shrinking the sample batch from %d", env_id, len(clip_ids), batch)
            batch = len(clip_ids)

        if batch <= config.k_support:
            raise InsufficientClipsError(f"environment '{env_id}' needs more than K={config.k_support} clips, has {len(clip_ids)}")

        chosen = [clip_ids[idx] for idx in rng.choice(len(clip_ids), size=batch, replace=False)]
        plan.append((env_id, chosen[: config.k_support], chosen[config.k_support:]))

    return plan


def sample_episodes(
    dataset: FeatureDataset,
    config: MetaConfig,
    rng: np.random.Generator,
) -> list[EpisodeBatch]:
    """One episode per environment in random order.

    Parameters
    ----------
    dataset : FeatureDataset
        Training clips.
    config : MetaConfig
        K and sample batch.
    rng : Generator
        Random generator.

    Return
    ------
    episodes : list of EpisodeBatch
        Episodes with K support and batch - K query clips."""

    return [EpisodeBatch.from_ids(dataset, *item) for item in plan_episodes(dataset, config, rng)]
