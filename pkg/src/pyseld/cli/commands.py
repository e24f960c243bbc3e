"""pipeline stages behind the subcommands"""
from __future__ import annotations

import argparse
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import pandas as pd

from pyseld.config import ExperimentConfig
from pyseld.evaluation import (
    FrameEvents,
    attenuation_report,
    clustering_purity,
    diagonal_hits,
    events_from_labels,
    export_workbook,
    match_and_score,
    scores_frame,
    similarity_map,
    write_frame,
    write_report,
    write_scores,
)
from pyseld.exceptions import ConfigError, DataError
from pyseld.features import FeatureDataset
from pyseld.logger import get_modulelogger
from pyseld.meta import meta_test_adapt, meta_train, split_support, sweep_adaptation, train_supervised
from pyseld.model import BackboneConfig, SeldModel
from pyseld.scenes import LABEL_HOP_S, DatasetManifest, build_dataset, environment_srirs, noise_set, read_label_csv, reverb_ladder
from pyseld.utils.general import iterable_to_str, mapped_floats_to_str
from pyseld.utils.pool import call_threaded

logger = get_modulelogger(__name__)

MANIFEST_FILE = "manifest.yaml"
MODEL_FILE = "model.ckpt"


@dataclass
class RunContext:
    """Parsed arguments, effective config and collected inputs of a run"""

    args: argparse.Namespace
    config: ExperimentConfig
    output: Path
    inputs: dict[str, Path] = field(default_factory=dict)

    def dataset_root(self) -> Path:
        """dataset root from --data or data.root"""

        root = self.args.data or self.config.data.root
        if root is None:
            raise ConfigError("no dataset root, set data.root or pass --data")

        return Path(root)

    def manifest(self) -> DatasetManifest:
        """manifest of the dataset root"""

        path = self.dataset_root().joinpath(MANIFEST_FILE)
        if not path.is_file():
            raise DataError(f"no manifest at '{path}'")

        self.inputs["manifest"] = path
        return DatasetManifest.load(path)

    def dataset(self) -> FeatureDataset:
        """features of every manifest clip"""

        cache_dir = self.dataset_root().joinpath("features") if self.config.data.cache else None
        return FeatureDataset.from_manifest(
            self.manifest(), self.config.data.features, cache_dir=cache_dir, workers=self.config.synthesis.workers,
        )

    def model(self, path: Path) -> SeldModel:
        """checkpoint recorded as input"""

        self.inputs["model"] = path
        return SeldModel.load(path)

    def split(self, dataset: FeatureDataset) -> tuple[list[str], list[str]]:
        """train and test rooms, every room is a test room without a split"""

        train, test = self.config.data.split(dataset.env_ids)
        return train, test or dataset.env_ids


def fit_backbone(config: BackboneConfig, dataset: FeatureDataset) -> BackboneConfig:
    """backbone input and output sizes taken from the dataset"""

    channels, frames, mels = dataset.input_shape
    label_frames, n_classes, _ = dataset.target_shape

    fitted = replace(
        config, in_channels=channels, n_frames=frames, n_mels=mels,
        n_label_frames=label_frames, n_classes=n_classes,
    )

    if fitted != config:
        logger.info("Backbone sizes follow the dataset: %d x %d x %d input, %d classes", channels, frames, mels, n_classes)

    return fitted


def synth_srir(ctx: RunContext) -> None:
    """SRIR bank of every configured room"""

    synthesis = ctx.config.synthesis
    if not synthesis.environments:
        raise ConfigError("synthesis config lists no environments")

    indexes = []
    for env_idx, env in enumerate(synthesis.environments):
        _, _, index = environment_srirs(env, env_idx, synthesis, ctx.output)
        indexes.append(index)

    write_scores(ctx.output.joinpath("srir_index.csv"), pd.concat(indexes, ignore_index=True))


def synth_scenes(ctx: RunContext) -> None:
    """labeled dataset of the configured rooms or a study preset"""

    args, synthesis = ctx.args, ctx.config.synthesis

    if args.study == "reverb-ladder":
        synthesis = replace(synthesis, environments=reverb_ladder(n_clips=args.clips, n_sources=args.sources))

    elif args.study == "noise-set":
        rooms = noise_set(args.rooms, seed=synthesis.seed, n_clips=args.clips, n_sources=args.sources)
        synthesis = replace(synthesis, environments=rooms)

    ctx.config = replace(ctx.config, synthesis=synthesis)
    manifest = build_dataset(synthesis, ctx.output)

    logger.info("Wrote %d clips of %d rooms to '%s'", len(manifest), len(manifest.env_ids), ctx.output)


def train_ei(ctx: RunContext) -> None:
    """supervised training on the train rooms"""

    config = ctx.config
    dataset = ctx.dataset()
    train, _ = config.data.split(dataset.env_ids)

    model = SeldModel.create(
        fit_backbone(config.model, dataset), method="seld",
        extractor=config.extractor, attenuation=config.attenuation,
        attenuation_input=config.meta.attenuation_input, seed=config.training.seed,
    )

    model, log = train_supervised(model, dataset.subset(train), config.training)

    model.save(ctx.output.joinpath(MODEL_FILE))
    write_scores(ctx.output.joinpath("train_log.csv"), log)


def meta_train_cmd(ctx: RunContext) -> None:
    """episodic meta-training on the train rooms"""

    args = ctx.args
    ctx.config = ctx.config.with_method(args.method, args.attenuation_input)

    config = ctx.config
    meta = config.meta

    if args.init is None and meta.method in ("meta_pp", "env_adaptive"):
        raise ConfigError(f"method '{meta.method}' starts from a pre-trained model, pass --init")

    dataset = ctx.dataset()
    train, _ = config.data.split(dataset.env_ids)

    if args.init is not None:
        model = ctx.model(args.init).with_method(meta.method, meta.attenuation_input, seed=meta.seed)

    else:
        model = SeldModel.create(
            fit_backbone(config.model, dataset), method=meta.method,
            extractor=config.extractor, attenuation=config.attenuation,
            attenuation_input=meta.attenuation_input, seed=meta.seed,
        )

    model, log = meta_train(model, dataset.subset(train), meta)

    model.save(ctx.output.joinpath(MODEL_FILE))
    write_scores(ctx.output.joinpath("meta_log.csv"), log)


def adapt(ctx: RunContext) -> None:
    """adaptation to one room with its query scores"""

    args, config = ctx.args, ctx.config

    model = ctx.model(args.model)
    dataset = ctx.dataset()

    if args.env not in dataset.env_ids:
        raise ConfigError(f"environment '{args.env}' is not in the dataset: {iterable_to_str(dataset.env_ids)}")

    result = meta_test_adapt(
        model, dataset, args.env, config.meta, n_steps=args.steps,
        doa_threshold=config.evaluation.doa_threshold, segment_frames=config.evaluation.segment_frames,
    )

    model.with_params(theta=result.theta).save(ctx.output.joinpath("adapted.ckpt"))

    losses = pd.DataFrame({"step": range(len(result.query_losses)), "query_loss": result.query_losses})
    write_scores(ctx.output.joinpath("adapt_log.csv"), losses)
    write_scores(ctx.output.joinpath("scores.csv"), scores_frame({args.env: result.scores}))

    write_report(
        ctx.output.joinpath("report.yaml"), {args.env: result.scores},
        extra={
            "steps": result.steps,
            "support_ids": list(result.support_ids),
            "lambdas": result.lambdas.cpu().numpy().tolist(),
        },
    )


def _prediction_scores(ctx: RunContext) -> dict:
    """room scores of predicted label files against the references"""

    evaluation = ctx.config.evaluation
    manifest = ctx.manifest()

    n_frames = int(round(manifest.clip_s / LABEL_HOP_S))
    _, test = ctx.config.data.split(list(manifest.env_ids))

    room_scores = {}
    for env_id, clips in manifest.clips_by_env().items():

        if test and env_id not in test:
            continue

        refs, preds = [], []
        for clip in clips:

            path = ctx.args.predictions.joinpath(f"{clip.clip_id}.csv")
            if not path.is_file():
                raise DataError(f"no prediction for clip '{clip.clip_id}' in '{ctx.args.predictions}'")

            refs.append(events_from_labels(read_label_csv(manifest.path(clip.csv_path)), n_frames))
            preds.append(events_from_labels(read_label_csv(path), n_frames))

        room_scores[env_id] = match_and_score(
            FrameEvents.concat(preds), FrameEvents.concat(refs), manifest.n_classes,
            evaluation.doa_threshold, evaluation.segment_frames,
        )

    return room_scores


def _adapted_scores(ctx: RunContext) -> dict:
    """room scores of the model adapted to every test room"""

    config = ctx.config
    model = ctx.model(ctx.args.model)
    dataset = ctx.dataset()

    _, test = ctx.split(dataset)
    n_steps = config.meta.inner_steps if config.evaluation.adapt else 0

    results = call_threaded(
        meta_test_adapt, {env_id: {"env_id": env_id} for env_id in test}, workers=config.meta.workers,
        model=model, dataset=dataset, config=config.meta, n_steps=n_steps,
        doa_threshold=config.evaluation.doa_threshold, segment_frames=config.evaluation.segment_frames,
    )

    return {env_id: result.scores for env_id, result in results.items()}


def evaluate(ctx: RunContext) -> None:
    """room-wise and macro scores"""

    room_scores = _prediction_scores(ctx) if ctx.args.predictions is not None else _adapted_scores(ctx)
    frame = scores_frame(room_scores)

    for room, scores in room_scores.items():
        logger.info("Room '%s': %s", room, mapped_floats_to_str(scores.as_dict(), 4))

    write_scores(ctx.output.joinpath("scores.csv"), frame)
    write_report(ctx.output.joinpath("report.yaml"), room_scores)

    if ctx.config.evaluation.workbook:
        export_workbook(ctx.output.joinpath("scores.xlsx"), {"scores": frame})


def analyze(ctx: RunContext) -> None:
    """similarity map, attenuation report and adaptation sweeps"""

    config = ctx.config
    k_support = config.analysis.k_support

    model = ctx.model(ctx.args.model)
    dataset = ctx.dataset()

    frames, summary = {}, {}

    # support against query representations per room
    if model.omega is not None:

        support, query = [], []
        for env_id in dataset.env_ids:

            support_ids, query_ids = split_support(dataset, env_id, k_support)
            support.append(model.representation(dataset.batch(support_ids)[0], training=True, env_id=env_id))
            query.append(model.representation(dataset.batch(query_ids)[0], training=True, env_id=env_id))

        similarity = similarity_map(support, query)
        vectors = np.stack([rep.vector.detach().cpu().numpy() for rep in support + query])

        frames["similarity"] = similarity
        summary["diagonal_hits"] = diagonal_hits(similarity)
        summary["rooms"] = len(dataset.env_ids)
        summary["clustering_purity"] = clustering_purity(vectors, dataset.env_ids * 2)

        write_frame(ctx.output.joinpath("similarity.csv"), similarity)

    if model.adaptive:

        report = attenuation_report(model, dataset, dataset.env_ids, k_support=k_support, bypass=config.meta.bypass_attenuation)
        frames["attenuation"] = report.lambdas
        summary["env_insensitive_layers"] = report.insensitive

        write_frame(ctx.output.joinpath("attenuation.csv"), report.lambdas)
        write_frame(ctx.output.joinpath("attenuation_summary.csv"), report.summary())

    _, test = ctx.split(dataset)
    sweep = sweep_adaptation(model, dataset, test, config.meta, steps=config.analysis.steps, shots=config.analysis.shots)
    frames["sweep"] = sweep

    write_scores(ctx.output.joinpath("sweep.csv"), sweep)
    write_report(ctx.output.joinpath("analysis.yaml"), {}, extra=summary)

    if config.evaluation.workbook:
        export_workbook(ctx.output.joinpath("analysis.xlsx"), frames)


COMMANDS = {
    "synth-srir": synth_srir,
    "synth-scenes": synth_scenes,
    "train-ei": train_ei,
    "meta-train": meta_train_cmd,
    "adapt": adapt,
    "evaluate": evaluate,
    "analyze": analyze,
}
