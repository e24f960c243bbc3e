"""binary feature cache"""
from __future__ import annotations

import os
import struct

import numpy as np

from pyseld.exceptions import DataError

from .spectral import FeatureConfig, FeatureTensor

MAGIC = b"PSFT"
VERSION = 1
HEADER = struct.Struct("<4sIIIIIII")


def write_feature_cache(path: str | os.PathLike, features: FeatureTensor, config: FeatureConfig) -> None:
    """write features with header (magic, version, C, T, F, fs, hop, n_mels)"""

    channels, frames, bands = features.shape
    header = HEADER.pack(MAGIC, VERSION, channels, frames, bands, config.fs, config.hop, config.n_mels)

    with open(path, mode="wb") as file:
        file.write(header)
        file.write(features.data.astype("<f4").tobytes())


def read_feature_cache(path: str | os.PathLike, config: FeatureConfig | None = None) -> FeatureTensor:
    """read cached features, optionally checking they match config"""

    with open(path, mode="rb") as file:
        blob = file.read()

    if len(blob) < HEADER.size:
        raise DataError(f"feature cache '{path}' is truncated")

    magic, version, channels, frames, bands, fs, hop, n_mels = HEADER.unpack_from(blob)
    if magic != MAGIC or version != VERSION:
        raise DataError(f"'{path}' is not a version {VERSION} feature cache")

    if config is not None and (fs, hop, n_mels) != (config.fs, config.hop, config.n_mels):
        raise DataError(f"feature cache '{path}' was written with fs={fs}, hop={hop}, n_mels={n_mels}")

    count = channels * frames * bands
    if len(blob) != HEADER.size + 4 * count:
        raise DataError(f"feature cache '{path}' holds {len(blob) - HEADER.size} bytes, expected {4 * count}")

    data = np.frombuffer(blob, dtype="<f4", offset=HEADER.size).reshape(channels, frames, bands)
    mel_params = (n_mels, config.f_min, config.f_max) if config else (n_mels, 50.0, 12000.0)

    return FeatureTensor(data=data.astype(np.float32), frame_hop_s=hop / fs, mel_params=mel_params)
