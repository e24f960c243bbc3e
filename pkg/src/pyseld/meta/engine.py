"""first-order episodic meta-learning"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import pandas as pd
import torch

from pyseld.exceptions import ConfigError, DivergenceError, PreconditionError
from pyseld.features import FeatureDataset
from pyseld.logger import get_modulelogger
from pyseld.model import SeldModel
from pyseld.nn import OptimizerState, ParamSet, adamw_step, sgd_step, step_decay
from pyseld.utils.pool import call_threaded

from .episodes import EpisodeBatch, MetaConfig, plan_episodes

logger = get_modulelogger(__name__)

RUN_LOG_COLUMNS = ["epoch", "lr", "inner_start_loss", "query_loss", "wall_time_s"]


def check_finite(loss: torch.Tensor, where: str) -> float:
    """loss value, DivergenceError when not finite"""

    value = loss.item()
    if not np.isfinite(value):
        raise DivergenceError(f"non-finite {where} loss: {value}")

    return value


def adapt_steps(
    model: SeldModel,
    theta: ParamSet,
    support: tuple[torch.Tensor, torch.Tensor],
    alpha: float,
    n_steps: int,
    training: bool = True,
) -> tuple[ParamSet, list[float]]:
    """SGD steps on the support loss and the loss before each step"""

    x, y = support

    losses = []
    for _ in range(n_steps):
        leaves = theta.leaves()
        loss, _ = model.loss(x, y, leaves, training=training)
        losses.append(check_finite(loss, "support"))

        grads = torch.autograd.grad(loss, list(leaves.values()))
        theta = sgd_step(leaves, grads, alpha)

    return theta, losses


def inner_adapt(
    model: SeldModel,
    theta_init: ParamSet,
    support: tuple[torch.Tensor, torch.Tensor],
    alpha: float,
    n_steps: int,
    training: bool = True,
) -> ParamSet:
    """Adapt backbone parameters to a support set.

    Parameters
    ----------
    model : SeldModel
        Model providing the backbone and batchnorm statistics.
    theta_init : ParamSet
        Starting point, λ ⊙ Θ for env_adaptive models.
    support : tuple of Tensor
        Support features and targets.
    alpha : float
        Adaptation learning rate.
    n_steps : int
        Number of SGD steps N.
    training : bool, default True
        Normalize with support batch statistics.

    Return
    ------
    theta : ParamSet
        Adapted parameters, theta_init untouched."""

    if n_steps < 1:
        raise PreconditionError(f"inner loop needs at least one step, got {n_steps}")

    theta, _ = adapt_steps(model, theta_init.detach(), support, alpha, n_steps, training)
    return theta


@dataclass(frozen=True, eq=False)
class EpisodeGradients:
    """First-order gradients of one episode"""

    theta: list[torch.Tensor]
    omega: list[torch.Tensor] | None
    phi: list[torch.Tensor] | None
    inner_start_loss: float
    query_loss: float
    bn_state: dict[str, torch.Tensor]
    lambdas: torch.Tensor | None = None


@dataclass(frozen=True, eq=False)
class MetaGradients:
    """Episode-averaged gradients"""

    theta: list[torch.Tensor]
    omega: list[torch.Tensor] | None = None
    phi: list[torch.Tensor] | None = None
    inner_start_loss: float = 0.0
    query_loss: float = 0.0
    bn_state: dict[str, torch.Tensor] = field(default_factory=dict)
    episodes: int = 0


def _uses_attenuation(model: SeldModel, config: MetaConfig) -> bool:
    return model.adaptive and not config.bypass_attenuation


def episode_gradients(model: SeldModel, episode: EpisodeBatch, config: MetaConfig) -> EpisodeGradients:
    """Inner adaptation and first-order gradients of one episode.

    Θ receives the query-loss gradient at the adapted parameters. Ω and
    Φ receive the gradient through λ ⊙ Θ with the inner updates treated
    as constant."""

    training = config.transductive_bn
    adaptive = _uses_attenuation(model, config)

    # differentiable copies of the outer-loop parameters
    if adaptive:
        model = model.with_params(omega=model.omega.leaves(), phi=model.phi.leaves())

    x_support, y_support = episode.support
    lambdas, theta_start = model.attenuate(
        x_support, y_support, bypass=not adaptive, training=training, env_id=episode.env_id,
    )

    # running statistics follow the support batch
    with torch.no_grad():
        start_loss, bn_state = model.loss(x_support, y_support, theta_start.detach(), training=True)

    theta_prime = inner_adapt(model, theta_start, episode.support, config.inner_lr, config.inner_steps, training)

    leaves = theta_prime.leaves()
    query_loss, _ = model.loss(*episode.query, leaves, training=training)
    value = check_finite(query_loss, "query")

    grads = list(torch.autograd.grad(query_loss, list(leaves.values())))

    omega_grads = phi_grads = None
    if adaptive:

        # first-order surrogate through the attenuation product
        surrogate = sum((grad * theta_start[name]).sum() for grad, name in zip(grads, theta_start))

        phi_leaves = list(model.phi.values())
        omega_leaves = list(model.omega.values()) if model.attenuation_input == "representations" else []

        found = torch.autograd.grad(surrogate, phi_leaves + omega_leaves, allow_unused=True)
        found = [torch.zeros_like(t) if g is None else g for g, t in zip(found, phi_leaves + omega_leaves)]

        phi_grads = found[: len(phi_leaves)]
        omega_grads = found[len(phi_leaves):] if omega_leaves else None

    return EpisodeGradients(
        theta=grads,
        omega=omega_grads,
        phi=phi_grads,
        inner_start_loss=check_finite(start_loss, "support"),
        query_loss=value,
        bn_state=bn_state,
        lambdas=lambdas.detach(),
    )


def _mean(tensors: Sequence[Sequence[torch.Tensor]]) -> list[torch.Tensor]:
    """ordered elementwise mean over episodes"""

    total = [t.detach().clone() for t in tensors[0]]
    for item in tensors[1:]:
        total = [a + b for a, b in zip(total, item)]

    return [t / len(tensors) for t in total]


def meta_gradients(model: SeldModel, episodes: Sequence[EpisodeBatch], config: MetaConfig) -> MetaGradients:
    """Episode gradients averaged in episode order"""

    if not episodes:
        raise PreconditionError("outer step needs at least one episode")

    jobs = {idx: {"episode": episode} for idx, episode in enumerate(episodes)}
    results = list(call_threaded(episode_gradients, jobs, workers=config.workers, model=model, config=config).values())

    bn_names = list(results[0].bn_state)
    bn_mean = _mean([[r.bn_state[name] for name in bn_names] for r in results])

    return MetaGradients(
        theta=_mean([r.theta for r in results]),
        omega=_mean([r.omega for r in results]) if results[0].omega is not None else None,
        phi=_mean([r.phi for r in results]) if results[0].phi is not None else None,
        inner_start_loss=float(np.mean([r.inner_start_loss for r in results])),
        query_loss=float(np.mean([r.query_loss for r in results])),
        bn_state=dict(zip(bn_names, bn_mean)),
        episodes=len(results),
    )


def init_optimizer_states(model: SeldModel, config: MetaConfig) -> dict[str, OptimizerState]:
    """one AdamW state per parameter group"""

    state = OptimizerState(kind="adamw", lr=config.meta_lr, weight_decay=config.weight_decay)
    return {"backbone": state, "extractor": state, "attenuation": state}


def meta_outer_step(
    model: SeldModel,
    episodes: Sequence[EpisodeBatch],
    config: MetaConfig,
    states: dict[str, OptimizerState] | None = None,
    lr: float | None = None,
) -> tuple[SeldModel, dict[str, OptimizerState], MetaGradients]:
    """One AdamW update of Θ, Ω and Φ from averaged episode gradients.

    Return
    ------
    model, states, grads : SeldModel, dict, MetaGradients
        Updated model, optimizer states and the applied gradients."""

    states = dict(states or init_optimizer_states(model, config))
    lr = config.meta_lr if lr is None else lr

    grads = meta_gradients(model, episodes, config)
    changes = {"bn_state": grads.bn_state}

    changes["theta"], states["backbone"] = adamw_step(model.theta, grads.theta, states["backbone"].with_lr(lr))

    if grads.omega is not None:
        changes["omega"], states["extractor"] = adamw_step(model.omega, grads.omega, states["extractor"].with_lr(lr))

    if grads.phi is not None:
        changes["phi"], states["attenuation"] = adamw_step(model.phi, grads.phi, states["attenuation"].with_lr(lr))

    return model.with_params(**changes), states, grads


def meta_train(
    model: SeldModel,
    dataset: FeatureDataset,
    config: MetaConfig,
) -> tuple[SeldModel, pd.DataFrame]:
    """Episodic meta-training over every environment per epoch.

    Episodes of an epoch are processed in chunks of room_batch, one
    outer update per chunk.

    Parameters
    ----------
    model : SeldModel
        Initial model, random for meta, pre-trained for meta_pp and
        env_adaptive.
    dataset : FeatureDataset
        Training environments.
    config : MetaConfig
        Episodic settings.

    Return
    ------
    model, log : SeldModel, DataFrame
        Meta-trained model and the per-epoch run log."""

    if model.method not in ("meta", "meta_pp", "env_adaptive"):
        raise ConfigError(f"meta-training does not apply to method '{model.method}'")

    rng = np.random.default_rng(config.seed)
    states = init_optimizer_states(model, config)

    rows = []
    for epoch in range(config.epochs):

        start = time.perf_counter()
        lr = step_decay(epoch, config.meta_lr, config.lr_hold, config.lr_every, config.lr_gamma)

        plan = plan_episodes(dataset, config, rng)

        start_losses, query_losses = [], []
        for offset in range(0, len(plan), config.room_batch):

            chunk = [EpisodeBatch.from_ids(dataset, *item) for item in plan[offset: offset + config.room_batch]]
            model, states, grads = meta_outer_step(model, chunk, config, states, lr)

            start_losses.extend([grads.inner_start_loss] * grads.episodes)
            query_losses.extend([grads.query_loss] * grads.episodes)

        rows.append([epoch, lr, float(np.mean(start_losses)), float(np.mean(query_losses)), time.perf_counter() - start])
        logger.info("Epoch %d: inner start loss %.5f, query loss %.5f", epoch, rows[-1][2], rows[-1][3])

    return model, pd.DataFrame(rows, columns=RUN_LOG_COLUMNS)


__all__ = [
    "EpisodeGradients",
    "MetaGradients",
    "adapt_steps",
    "check_finite",
    "episode_gradients",
    "init_optimizer_states",
    "inner_adapt",
    "meta_gradients",
    "meta_outer_step",
    "meta_train",
]
