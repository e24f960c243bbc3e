"""meta-test adaptation to unseen environments"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import pandas as pd
import torch

from pyseld.evaluation import DOA_THRESHOLD, SEGMENT_FRAMES, FrameEvents, MetricScores, events_from_accdoa, events_from_labels, match_and_score
from pyseld.exceptions import DataError, InsufficientClipsError, PreconditionError
from pyseld.features import FeatureDataset
from pyseld.logger import get_modulelogger
from pyseld.model import SeldModel, accdoa_loss, resample_frames
from pyseld.nn import ParamSet

from .engine import adapt_steps, check_finite
from .episodes import MetaConfig

logger = get_modulelogger(__name__)

SWEEP_COLUMNS = ["env_id", "k_support", "steps", "query_loss", "er20", "f20", "le_cd", "lr_cd", "e_seld"]


@dataclass(frozen=True, eq=False)
class AdaptationResult:
    """Adapted parameters and query scores of one environment.

    query_losses holds the query loss before adaptation followed by the
    loss after each inner step."""

    env_id: str
    theta: ParamSet
    query_losses: list[float]
    lambdas: torch.Tensor
    scores: MetricScores
    support_ids: tuple[str, ...]
    query_ids: tuple[str, ...]
    step_scores: dict[int, MetricScores] = field(default_factory=dict)

    @property
    def steps(self) -> int:
        """number of inner steps taken"""
        return len(self.query_losses) - 1


def split_support(dataset: FeatureDataset, env_id: str, k_support: int) -> tuple[list[str], list[str]]:
    """first K sorted clips as support, the rest as query"""

    clip_ids = dataset.clip_ids(env_id)
    if len(clip_ids) <= k_support:
        raise InsufficientClipsError(f"environment '{env_id}' needs more than K={k_support} clips, has {len(clip_ids)}")

    return clip_ids[:k_support], clip_ids[k_support:]


def reference_events(dataset: FeatureDataset, clip_ids: Iterable[str], threshold: float) -> FrameEvents:
    """reference events from labels, decoded targets when labels are absent"""

    parts = []
    for cid in clip_ids:

        n_frames = dataset.targets(cid).shape[0]
        try:
            parts.append(events_from_labels(dataset.labels(cid), n_frames))
        except DataError:
            parts.append(events_from_accdoa(dataset.targets(cid), threshold))

    return FrameEvents.concat(parts)


def score_query(
    model: SeldModel,
    theta: ParamSet,
    query: tuple[torch.Tensor, torch.Tensor],
    reference: FrameEvents,
    config: MetaConfig,
    doa_threshold: float = DOA_THRESHOLD,
    segment_frames: int = SEGMENT_FRAMES,
) -> tuple[float, MetricScores]:
    """query loss and metrics of the concatenated query clips"""

    x, y = query
    with torch.no_grad():
        output = model.forward(x, theta, training=config.transductive_bn)
        pred = resample_frames(output.accdoa, model.backbone.n_label_frames)
        loss = accdoa_loss(pred, y)

    predicted = FrameEvents.concat(events_from_accdoa(clip.cpu().numpy(), config.threshold) for clip in pred)
    scores = match_and_score(predicted, reference, model.backbone.n_classes, doa_threshold, segment_frames)

    return check_finite(loss, "query"), scores


def meta_test_adapt(
    model: SeldModel,
    dataset: FeatureDataset,
    env_id: str,
    config: MetaConfig,
    n_steps: int | None = None,
    k_support: int | None = None,
    record_steps: Sequence[int] | None = None,
    doa_threshold: float = DOA_THRESHOLD,
    segment_frames: int = SEGMENT_FRAMES,
) -> AdaptationResult:
    """Adapt to an unseen environment and score its query clips.

    Parameters
    ----------
    model : SeldModel
        Trained model of any method.
    dataset : FeatureDataset
        Clips of the environment.
    env_id : str
        Environment to adapt to.
    config : MetaConfig
        Inner learning rate, threshold and batchnorm mode.
    n_steps : int, default None
        Inner steps, config.inner_steps when None, 0 for zero-shot.
    k_support : int, default None
        Support clips, config.k_support when None.
    record_steps : sequence of int, default None
        Also score the query set after these steps.
    doa_threshold : float, default 20
        Spatial threshold of the detection scores in deg.
    segment_frames : int, default 10
        Frames per error-rate segment.

    Return
    ------
    result : AdaptationResult
        Adapted parameters, query losses and scores."""

    n_steps = config.inner_steps if n_steps is None else n_steps
    k_support = config.k_support if k_support is None else k_support

    if n_steps < 0:
        raise PreconditionError(f"number of adaptation steps must be non-negative, got {n_steps}")

    support_ids, query_ids = split_support(dataset, env_id, k_support)
    support, query = dataset.batch(support_ids), dataset.batch(query_ids)
    reference = reference_events(dataset, query_ids, config.threshold)

    lambdas, theta = model.attenuate(
        *support, bypass=config.bypass_attenuation, training=config.transductive_bn, env_id=env_id,
    )
    theta = theta.detach()

    record = set(record_steps or ())
    loss, scores = score_query(model, theta, query, reference, config, doa_threshold, segment_frames)

    losses, step_scores = [loss], {}
    if 0 in record:
        step_scores[0] = scores

    for step in range(1, n_steps + 1):

        theta, _ = adapt_steps(model, theta, support, config.inner_lr, 1, config.transductive_bn)
        loss, scores = score_query(model, theta, query, reference, config, doa_threshold, segment_frames)
        losses.append(loss)

        if step in record:
            step_scores[step] = scores

    logger.info("Adapted to '%s' in %d steps: query loss %.5f, E_SELD %.4f", env_id, n_steps, losses[-1], scores.e_seld)

    return AdaptationResult(
        env_id=env_id,
        theta=theta,
        query_losses=losses,
        lambdas=lambdas.detach(),
        scores=scores,
        support_ids=tuple(support_ids),
        query_ids=tuple(query_ids),
        step_scores=step_scores,
    )


def evaluate_zero_shot(model: SeldModel, dataset: FeatureDataset, env_id: str, config: MetaConfig) -> AdaptationResult:
    """query scores without adaptation"""
    return meta_test_adapt(model, dataset, env_id, config, n_steps=0)


def sweep_adaptation(
    model: SeldModel,
    dataset: FeatureDataset,
    env_ids: Sequence[str],
    config: MetaConfig,
    steps: Sequence[int] = (1, 5, 20, 100),
    shots: Sequence[int] | None = None,
) -> pd.DataFrame:
    """Query loss and scores over inner steps and support sizes.

    One adaptation per environment and support size runs up to the
    largest step count, intermediate counts are recorded on the way.

    Return
    ------
    frame : DataFrame
        One row per environment, support size and step count."""

    steps = sorted(set(steps))
    shots = sorted(set(shots or [config.k_support]))

    rows = []
    for env_id in env_ids:
        for k in shots:

            result = meta_test_adapt(
                model, dataset, env_id, config,
                n_steps=steps[-1], k_support=k, record_steps=steps,
            )

            for n in steps:
                scores = result.step_scores[n]
                rows.append([env_id, k, n, result.query_losses[n], *scores.as_dict().values()])

    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)
