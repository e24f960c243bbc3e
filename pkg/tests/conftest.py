"""shared fixtures"""
import numpy as np
import pytest
import torch

from pyseld.features import FeatureDataset
from pyseld.model import BackboneConfig
from pyseld.simulation import RoomSpec, default_array


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def anechoic_room():
    return RoomSpec(dims=(10.0, 10.0, 10.0), absorption=1.0, max_order=0, room_id="anechoic")


@pytest.fixture
def small_room():
    return RoomSpec(dims=(5.0, 4.0, 3.0), absorption=0.3, max_order=3, room_id="small")


@pytest.fixture
def center_array():
    return default_array((5.0, 5.0, 5.0))


@pytest.fixture
def tiny_backbone():
    return BackboneConfig(
        channels=(4, 4, 4, 4),
        time_pools=(2, 2, 1, 1),
        freq_pools=(2, 2, 2, 2),
        n_mels=16,
        n_frames=20,
        n_label_frames=5,
        gru_hidden=4,
        n_classes=2,
    )


def make_dataset(n_envs: int = 3, clips_per_env: int = 8, seed: int = 0) -> FeatureDataset:
    """random features with sparse unit-norm ACCDOA targets"""

    rng = np.random.default_rng(seed)
    features, targets, env_of = {}, {}, {}

    for env in range(n_envs):
        for clip in range(clips_per_env):

            clip_id = f"env{env}_clip{clip:02d}"
            features[clip_id] = rng.normal(size=(7, 20, 16)).astype(np.float32)

            # one active class per frame
            target = np.zeros((5, 2, 3), dtype=np.float32)
            vectors = rng.normal(size=(5, 3))
            vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
            target[np.arange(5), rng.integers(0, 2, size=5)] = vectors

            targets[clip_id] = target
            env_of[clip_id] = f"env{env}"

    return FeatureDataset(features, targets, env_of)


@pytest.fixture
def tiny_dataset():
    return make_dataset()


@pytest.fixture(autouse=True)
def _seed_torch():
    torch.manual_seed(0)


@pytest.fixture
def dataset_factory():
    return make_dataset
