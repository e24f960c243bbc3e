"""in-memory feature and target store of a manifest"""
from __future__ import annotations

import os
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
import soundfile as sf
import torch

from pyseld.exceptions import DataError, InsufficientClipsError
from pyseld.logger import get_modulelogger
from pyseld.model.accdoa import labels_to_accdoa
from pyseld.scenes import LABEL_HOP_S, DatasetManifest, Label, read_label_csv
from pyseld.utils.pool import call_threaded

from .cache import read_feature_cache, write_feature_cache
from .spectral import FeatureConfig, extract_features

logger = get_modulelogger(__name__)


def _load_clip(
    wav_path: Path,
    csv_path: Path,
    config: FeatureConfig,
    n_classes: int,
    n_label_frames: int,
    cache_path: Path | None,
) -> tuple[np.ndarray, np.ndarray, list[Label]]:
    """features, targets and labels of one clip"""

    if cache_path is not None and cache_path.is_file():
        features = read_feature_cache(cache_path, config)

    else:
        try:
            audio, fs = sf.read(wav_path, dtype="float64", always_2d=True)
        except (OSError, sf.SoundFileError) as exc:
            raise DataError(f"cannot read audio '{wav_path}': {exc}") from exc

        if fs != config.fs:
            raise DataError(f"'{wav_path}' has sample rate {fs}, expected {config.fs}")

        features = extract_features(audio.T, config)
        if cache_path is not None:
            write_feature_cache(cache_path, features, config)

    labels = read_label_csv(csv_path)
    targets = labels_to_accdoa(labels, n_label_frames, n_classes)

    return features.data, targets, labels


class FeatureDataset:
    """Features (C, T, F) and ACCDOA targets (T_label, M, 3) keyed by clip id"""

    def __init__(
        self,
        features: Mapping[str, np.ndarray],
        targets: Mapping[str, np.ndarray],
        env_of: Mapping[str, str],
        labels: Mapping[str, list[Label]] | None = None,
    ):

        if set(features) != set(targets) or set(features) != set(env_of):
            raise DataError("features, targets and environments must cover the same clips")

        if not features:
            raise DataError("dataset holds no clips")

        self._features = dict(features)
        self._targets = dict(targets)
        self._env_of = dict(env_of)
        self._labels = dict(labels or {})

        shapes = {value.shape for value in self._features.values()}
        if len(shapes) != 1:
            raise DataError(f"clips have inconsistent feature shapes: {sorted(shapes)}")

    def __len__(self) -> int:
        return len(self._features)

    def __repr__(self) -> str:
        return f"FeatureDataset(clips={len(self)}, envs={len(self.env_ids)})"

    @property
    def env_ids(self) -> list[str]:
        """environments in first-seen order"""
        return list(dict.fromkeys(self._env_of.values()))

    @property
    def input_shape(self) -> tuple[int, int, int]:
        """(C, T, F) of every clip"""
        return next(iter(self._features.values())).shape

    @property
    def target_shape(self) -> tuple[int, int, int]:
        """(T_label, M, 3) of every clip"""
        return next(iter(self._targets.values())).shape

    def clip_ids(self, env_id: str | None = None) -> list[str]:
        """sorted clip ids, optionally of one environment"""
        return sorted(cid for cid, env in self._env_of.items() if env_id in (None, env))

    def clips_by_env(self) -> dict[str, list[str]]:
        """sorted clip ids per environment"""
        return {env_id: self.clip_ids(env_id) for env_id in self.env_ids}

    def env_of(self, clip_id: str) -> str:
        """environment of a clip"""
        return self._env_of[clip_id]

    def labels(self, clip_id: str) -> list[Label]:
        """reference labels of a clip"""

        if clip_id not in self._labels:
            raise DataError(f"no reference labels stored for clip '{clip_id}'")

        return self._labels[clip_id]

    def targets(self, clip_id: str) -> np.ndarray:
        """ACCDOA targets of a clip"""
        return self._targets[clip_id]

    def batch(self, clip_ids: Iterable[str], dtype: torch.dtype = torch.float32) -> tuple[torch.Tensor, torch.Tensor]:
        """stacked features and targets"""

        clip_ids = list(clip_ids)
        if not clip_ids:
            raise InsufficientClipsError("cannot batch an empty clip selection")

        x = torch.as_tensor(np.stack([self._features[cid] for cid in clip_ids]), dtype=dtype)
        y = torch.as_tensor(np.stack([self._targets[cid] for cid in clip_ids]), dtype=dtype)

        return x, y

    def subset(self, env_ids: Iterable[str]) -> FeatureDataset:
        """dataset restricted to environments"""

        env_ids = set(env_ids)
        keep = [cid for cid, env in self._env_of.items() if env in env_ids]

        return FeatureDataset(
            features={cid: self._features[cid] for cid in keep},
            targets={cid: self._targets[cid] for cid in keep},
            env_of={cid: self._env_of[cid] for cid in keep},
            labels={cid: self._labels[cid] for cid in keep if cid in self._labels},
        )

    @classmethod
    def from_manifest(
        cls,
        manifest: DatasetManifest,
        config: FeatureConfig | None = None,
        cache_dir: str | os.PathLike | None = None,
        workers: int | None = None,
    ) -> FeatureDataset:
        """Extract features of every manifest clip through the worker pool.

        Parameters
        ----------
        manifest : DatasetManifest
            Dataset manifest.
        config : FeatureConfig, default None
            STFT and mel settings, sample rate taken from the manifest.
        cache_dir : path, default None
            Read and write per-clip feature caches here.
        workers : int, default None
            Worker threads.

        Return
        ------
        dataset : FeatureDataset
            In-memory dataset."""

        config = config or FeatureConfig(fs=manifest.fs)
        n_label_frames = int(round(manifest.clip_s / LABEL_HOP_S))

        if cache_dir is not None:
            cache_dir = Path(cache_dir)
            cache_dir.mkdir(parents=True, exist_ok=True)

        jobs = {
            clip.clip_id: {
                "wav_path": manifest.path(clip.wav_path),
                "csv_path": manifest.path(clip.csv_path),
                "cache_path": None if cache_dir is None else cache_dir.joinpath(f"{clip.clip_id}.feat"),
            }
            for clip in manifest.clips
        }

        results = call_threaded(
            _load_clip, jobs, workers=workers,
            config=config, n_classes=manifest.n_classes, n_label_frames=n_label_frames,
        )
        logger.info("Extracted features of %d clips", len(results))

        return cls(
            features={cid: res[0] for cid, res in results.items()},
            targets={cid: res[1] for cid, res in results.items()},
            env_of={clip.clip_id: clip.env_id for clip in manifest.clips},
            labels={cid: res[2] for cid, res in results.items()},
        )
