"""log-mel and intensity-vector features of FOA audio"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import librosa
import numpy as np

from pyseld.exceptions import LengthError, ShapeError

EPS = 1e-10

# FOA channel order
W, Y, Z, X = range(4)


@dataclass(frozen=True)
class FeatureConfig:
    """STFT and mel settings"""

    fs: int = 24000
    n_fft: int = 1024
    hop: int = 320
    n_mels: int = 64
    f_min: float = 50.0
    f_max: float = 12000.0

    @property
    def n_bins(self) -> int:
        """one-sided spectrum size"""
        return self.n_fft // 2 + 1

    def n_frames(self, n_samples: int) -> int:
        """frame count with center padding"""
        return 1 + n_samples // self.hop


@dataclass(frozen=True, eq=False)
class FeatureTensor:
    """Network input of one clip, shape (C, T, F)"""

    data: np.ndarray
    frame_hop_s: float
    mel_params: tuple[int, float, float] = (64, 50.0, 12000.0)

    def __post_init__(self):

        if self.data.ndim != 3:
            raise ShapeError(f"features must be (C, T, F), got shape {self.data.shape}")

        if not np.all(np.isfinite(self.data)):
            raise ShapeError("features contain non-finite values")

    @property
    def shape(self) -> tuple[int, int, int]:
        """(C, T, F)"""
        return self.data.shape


def stft(audio: np.ndarray, config: FeatureConfig | None = None) -> np.ndarray:
    """Hann-windowed one-sided STFT, shape (channels, T, n_fft/2 + 1)"""

    config = config or FeatureConfig()
    audio = np.atleast_2d(np.asarray(audio, dtype=np.float64))

    if audio.shape[-1] < config.n_fft:
        raise LengthError(f"audio of {audio.shape[-1]} samples is shorter than the {config.n_fft} window")

    spec = librosa.stft(
        audio,
        n_fft=config.n_fft,
        hop_length=config.hop,
        window="hann",
        center=True,
        pad_mode="reflect",
    )

    return np.swapaxes(spec, -1, -2)


@lru_cache(maxsize=8)
def mel_filterbank(
    fs: int = 24000,
    n_fft: int = 1024,
    n_mels: int = 64,
    f_min: float = 50.0,
    f_max: float = 12000.0,
) -> np.ndarray:
    """Slaney mel triangles with unit row sums, shape (n_mels, n_fft/2 + 1)"""

    weights = librosa.filters.mel(
        sr=fs, n_fft=n_fft, n_mels=n_mels, fmin=f_min, fmax=f_max,
        htk=False, norm=None, dtype=np.float64,
    )

    weights = weights / weights.sum(axis=1, keepdims=True)
    weights.setflags(write=False)

    return weights


def _filterbank(spec: np.ndarray, config: FeatureConfig) -> np.ndarray:

    if spec.shape[-1] != config.n_bins:
        raise ShapeError(f"spectrum has {spec.shape[-1]} bins, expected {config.n_bins}")

    return mel_filterbank(config.fs, config.n_fft, config.n_mels, config.f_min, config.f_max)


def log_mel(spec: np.ndarray, config: FeatureConfig | None = None) -> np.ndarray:
    """log mel power per channel, shape (channels, T, n_mels)"""

    config = config or FeatureConfig()
    weights = _filterbank(spec, config)

    return np.log(np.abs(spec) ** 2 @ weights.T + EPS)


def intensity_vectors(spec: np.ndarray, config: FeatureConfig | None = None) -> np.ndarray:
    """Mel-banded active intensity normalized by the FOA energy density.

    Returns (x, y, z) components, shape (3, T, n_mels). Normalization by
    (|W|² + |X|² + |Y|² + |Z|²) / 2 bounds the vector norm by one and
    maps an SN3D plane wave from direction u onto u."""

    config = config or FeatureConfig()
    weights = _filterbank(spec, config)

    if spec.shape[0] != 4:
        raise ShapeError(f"intensity vectors need 4 FOA channels, got {spec.shape[0]}")

    intensity = np.real(np.conj(spec[W])[None] * spec[[X, Y, Z]])
    energy = 0.5 * np.sum(np.abs(spec) ** 2, axis=0)

    return (intensity @ weights.T) / (energy @ weights.T + EPS)


def extract_features(audio: np.ndarray, config: FeatureConfig | None = None) -> FeatureTensor:
    """Stack 4 log-mel and 3 intensity-vector channels.

    Parameters
    ----------
    audio : ndarray
        FOA audio in W, Y, Z, X order, shape (4, N).
    config : FeatureConfig, default None
        STFT and mel settings.

    Return
    ------
    features : FeatureTensor
        32-bit features, shape (7, T, n_mels)."""

    config = config or FeatureConfig()

    audio = np.asarray(audio)
    if audio.ndim != 2 or audio.shape[0] != 4:
        raise ShapeError(f"expected FOA audio of shape (4, N), got {audio.shape}")

    spec = stft(audio, config)
    data = np.concatenate([log_mel(spec, config), intensity_vectors(spec, config)], axis=0)

    return FeatureTensor(
        data=data.astype(np.float32),
        frame_hop_s=config.hop / config.fs,
        mel_params=(config.n_mels, config.f_min, config.f_max),
    )
