"""conventional supervised training of the environment-independent model"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import pandas as pd
import torch

from pyseld.exceptions import PreconditionError
from pyseld.features import FeatureDataset
from pyseld.logger import get_modulelogger
from pyseld.model import SeldModel
from pyseld.nn import OptimizerState, adamw_step, step_decay

from .engine import check_finite

logger = get_modulelogger(__name__)

TRAIN_LOG_COLUMNS = ["epoch", "lr", "train_loss", "wall_time_s"]


@dataclass(frozen=True)
class TrainConfig:
    """Minibatch AdamW settings"""

    epochs: int = 4
    batch_size: int = 16
    lr: float = 1e-3
    lr_hold: int = 3
    lr_every: int = 1
    lr_gamma: float = 0.9
    weight_decay: float = 0.01
    seed: int = 0

    def __post_init__(self):

        if self.batch_size < 1:
            raise PreconditionError(f"batch size must be positive, got {self.batch_size}")

        if self.epochs < 0:
            raise PreconditionError(f"epochs must be non-negative, got {self.epochs}")


def train_supervised(
    model: SeldModel,
    dataset: FeatureDataset,
    config: TrainConfig,
) -> tuple[SeldModel, pd.DataFrame]:
    """Train the backbone on pooled clips of all environments.

    Parameters
    ----------
    model : SeldModel
        Initial model, only Θ and the batchnorm statistics are trained.
    dataset : FeatureDataset
        Labeled training clips.
    config : TrainConfig
        Optimizer and schedule.

    Return
    ------
    model, log : SeldModel, DataFrame
        Trained model and the per-epoch mean training loss."""

    rng = np.random.default_rng(config.seed)
    clip_ids = dataset.clip_ids()

    theta, bn_state = model.theta, model.bn_state
    state = OptimizerState(kind="adamw", lr=config.lr, weight_decay=config.weight_decay)

    rows = []
    for epoch in range(config.epochs):

        start = time.perf_counter()
        lr = step_decay(epoch, config.lr, config.lr_hold, config.lr_every, config.lr_gamma)
        state = state.with_lr(lr)

        order = rng.permutation(len(clip_ids))
        losses = []
        for offset in range(0, len(order), config.batch_size):

            x, y = dataset.batch(clip_ids[idx] for idx in order[offset: offset + config.batch_size])

            leaves = theta.leaves()
            loss, bn_state = model.loss(x, y, leaves, bn_state, training=True)
            losses.append(check_finite(loss, "training"))

            grads = torch.autograd.grad(loss, list(leaves.values()))
            theta, state = adamw_step(theta, grads, state)

        rows.append([epoch, lr, float(np.mean(losses)), time.perf_counter() - start])
        logger.info("Epoch %d: training loss %.5f at lr %.2e", epoch, rows[-1][2], lr)

    bn_state = {name: tensor.detach() for name, tensor in bn_state.items()}
    return model.with_params(theta=theta, bn_state=bn_state), pd.DataFrame(rows, columns=TRAIN_LOG_COLUMNS)
