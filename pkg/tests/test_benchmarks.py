"""Desk-scale benchmarks of adaptation and environment representations"""
from dataclasses import replace

import numpy as np
import pytest

from pyseld.cli.commands import fit_backbone
from pyseld.config import load_config
from pyseld.evaluation import diagonal_hits, similarity_map
from pyseld.features import FeatureDataset
from pyseld.meta import evaluate_zero_shot, meta_test_adapt, meta_train, split_support, train_supervised
from pyseld.model import SeldModel
from pyseld.scenes import build_dataset, noise_set, reverb_ladder

pytestmark = pytest.mark.slow

SEEDS = range(5)


def _dataset(environments, seed: int, root) -> tuple:
    """synthesized clips of the micro setup in other rooms"""

    config = load_config().with_seed(seed)
    synthesis = replace(config.synthesis, environments=environments, max_order=6)

    manifest = build_dataset(synthesis, root)
    dataset = FeatureDataset.from_manifest(manifest, config.data.features, cache_dir=root / "features")

    return replace(config, synthesis=synthesis), dataset


def _adaptive_model(config, dataset: FeatureDataset) -> SeldModel:
    """supervised start followed by environment-adaptive meta-training"""

    model = SeldModel.create(
        fit_backbone(config.model, dataset), method="seld",
        extractor=config.extractor, attenuation=config.attenuation, seed=config.seed,
    )

    model, _ = train_supervised(model, dataset, replace(config.training, epochs=6))
    model = model.with_method("env_adaptive", "representations", seed=config.seed)

    model, _ = meta_train(model, dataset, replace(config.meta, epochs=10, k_support=10, sample_batch=32))
    return model


def test_adaptation_improves_held_out_rooms(tmp_path):

    improved = []
    for seed in SEEDS:

        train_rooms = reverb_ladder(rt60s=(0.3, 0.5, 0.7, 0.9, 1.2, 1.6), n_clips=64, n_sources=16)
        held_out = noise_set(6, seed=seed, n_clips=64, n_sources=16)

        config, train = _dataset(train_rooms, seed, tmp_path / f"train{seed}")
        _, test = _dataset(held_out, seed, tmp_path / f"test{seed}")

        model = _adaptive_model(config, train)
        meta = replace(config.meta, k_support=10, inner_steps=5)

        wins = 0
        for env_id in test.env_ids:
            zero_shot = evaluate_zero_shot(model, test, env_id, meta).scores.e_seld
            adapted = meta_test_adapt(model, test, env_id, meta).scores.e_seld
            wins += adapted < zero_shot

        improved.append(wins)

    assert np.median(improved) >= 4


def test_representations_identify_rooms(tmp_path):

    hits = []
    for seed in SEEDS:

        config, dataset = _dataset(reverb_ladder(n_clips=40, n_sources=16), seed, tmp_path / f"ladder{seed}")
        model = _adaptive_model(config, dataset)

        support, query = [], []
        for env_id in dataset.env_ids:

            support_ids, query_ids = split_support(dataset, env_id, 20)
            support.append(model.representation(dataset.batch(support_ids)[0], training=True, env_id=env_id))
            query.append(model.representation(dataset.batch(query_ids)[0], training=True, env_id=env_id))

        hits.append(diagonal_hits(similarity_map(support, query)))

    assert np.median(hits) >= 4
