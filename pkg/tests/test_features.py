"""STFT, log-mel and intensity-vector features, cache and dataset"""
import numpy as np
import pytest
import soundfile as sf
import torch
from scipy import signal

from pyseld.acoustics import Direction
from pyseld.exceptions import DataError, InsufficientClipsError, LengthError, ShapeError
from pyseld.features import (
    FeatureConfig,
    FeatureDataset,
    extract_features,
    intensity_vectors,
    log_mel,
    mel_filterbank,
    read_feature_cache,
    stft,
    write_feature_cache,
)
from pyseld.scenes import ClipEntry, DatasetManifest, Label, write_label_csv


def _plane_wave(direction: Direction, size: int, rng) -> np.ndarray:
    """SN3D plane wave of white noise in W, Y, Z, X order"""

    x, y, z = direction.to_cartesian()
    source = rng.normal(size=size)
    return np.stack([source, y * source, z * source, x * source])


def test_tone_bin():

    t = np.arange(24000) / 24000
    spec = stft(np.sin(2 * np.pi * 1000 * t))

    assert spec.shape == (1, 76, 513)
    assert int(np.argmax(np.abs(spec[0, 30]))) == round(1000 * 1024 / 24000) == 43


def test_stft_zeros_and_length():

    assert np.all(stft(np.zeros((4, 4800))) == 0)

    with pytest.raises(LengthError):
        stft(np.zeros(100))


def test_stft_parseval(rng):

    config = FeatureConfig()
    audio = rng.normal(size=9600)
    spec = stft(audio, config)[0]

    padded = np.pad(audio, config.n_fft // 2, mode="reflect")
    window = signal.get_window("hann", config.n_fft)

    for frame in (3, 10, 20):
        segment = padded[frame * config.hop: frame * config.hop + config.n_fft] * window

        power = np.abs(spec[frame]) ** 2
        spectral = power[0] + 2 * power[1:-1].sum() + power[-1]

        assert spectral / config.n_fft == pytest.approx(np.sum(segment**2), rel=1e-6)


def test_stft_shift_by_hop(rng):

    audio = rng.normal(size=(4, 9600))
    shifted = np.concatenate([np.zeros((4, 320)), audio[:, :-320]], axis=1)

    spec, spec_shifted = stft(audio), stft(shifted)

    # interior frames away from padding
    assert np.allclose(spec_shifted[:, 5:25], spec[:, 4:24], atol=1e-6)


def test_mel_filterbank_rows():

    weights = mel_filterbank()

    assert weights.shape == (64, 513)
    assert np.allclose(weights.sum(axis=1), 1.0)
    assert np.all(weights >= 0)


def test_log_mel_floor():

    spec = np.zeros((4, 3, 513), dtype=np.complex128)
    assert np.allclose(log_mel(spec), np.log(1e-10))

    with pytest.raises(ShapeError):
        log_mel(np.zeros((4, 3, 100)))


def test_log_mel_white_noise_is_flat(rng):

    spec = stft(rng.normal(size=32320))
    levels = 10 * np.log10(np.exp(log_mel(spec)[0, 2:-2].mean(axis=0)))

    assert levels.max() - levels.min() < 6.0


@pytest.mark.parametrize("azimuth, elevation", [(0, 0), (90, 0), (-135, 30), (60, -70)])
def test_intensity_plane_wave(azimuth, elevation, rng):

    direction = Direction.from_azel(azimuth, elevation, degrees=True)
    spec = stft(_plane_wave(direction, 9600, rng))

    iv = intensity_vectors(spec)
    assert iv.shape == (3, 31, 64)

    # active bands
    mean = iv[:, 5:25].mean(axis=(1, 2))
    assert np.allclose(mean, direction.to_cartesian(), atol=0.05)


def test_intensity_without_omni(rng):

    audio = rng.normal(size=(4, 4800))
    audio[0] = 0

    assert np.allclose(intensity_vectors(stft(audio)), 0.0)


def test_intensity_norm_bounded(rng):

    iv = intensity_vectors(stft(rng.normal(size=(4, 9600))))
    assert np.all(np.linalg.norm(iv, axis=0) <= 1 + 1e-9)

    with pytest.raises(ShapeError):
        intensity_vectors(stft(rng.normal(size=(2, 4800))))


def test_extract_features_shape(rng):

    features = extract_features(rng.normal(size=(4, 5 * 24000)) * 0.1)

    assert features.shape == (7, 376, 64)
    assert features.data.dtype == np.float32
    assert features.frame_hop_s == pytest.approx(320 / 24000)

    with pytest.raises(ShapeError):
        extract_features(rng.normal(size=(3, 4800)))


def test_extract_features_deterministic(rng):

    audio = rng.normal(size=(4, 4800))
    assert np.array_equal(extract_features(audio).data, extract_features(audio).data)


def test_feature_cache_round_trip(tmp_path, rng):

    config = FeatureConfig()
    features = extract_features(rng.normal(size=(4, 4800)), config)

    path = tmp_path.joinpath("clip.feat")
    write_feature_cache(path, features, config)
    loaded = read_feature_cache(path, config)

    assert np.array_equal(loaded.data, features.data)
    assert loaded.frame_hop_s == features.frame_hop_s

    with pytest.raises(DataError):
        read_feature_cache(path, FeatureConfig(hop=240))


def test_feature_cache_rejects_foreign_files(tmp_path):

    path = tmp_path.joinpath("clip.feat")

    path.write_bytes(b"XXXX" + bytes(28))
    with pytest.raises(DataError):
        read_feature_cache(path)

    path.write_bytes(b"PS")
    with pytest.raises(DataError):
        read_feature_cache(path)


def test_feature_dataset_access(tiny_dataset):

    assert len(tiny_dataset) == 24
    assert tiny_dataset.env_ids == ["env0", "env1", "env2"]
    assert tiny_dataset.input_shape == (7, 20, 16)
    assert tiny_dataset.target_shape == (5, 2, 3)

    clip_ids = tiny_dataset.clip_ids("env1")
    assert clip_ids == sorted(clip_ids) and len(clip_ids) == 8
    assert all(tiny_dataset.env_of(cid) == "env1" for cid in clip_ids)

    x, y = tiny_dataset.batch(clip_ids[:3])
    assert x.shape == (3, 7, 20, 16) and x.dtype == torch.float32
    assert y.shape == (3, 5, 2, 3)

    with pytest.raises(InsufficientClipsError):
        tiny_dataset.batch([])

    with pytest.raises(DataError):
        tiny_dataset.labels(clip_ids[0])


def test_feature_dataset_subset(tiny_dataset):

    subset = tiny_dataset.subset(["env2"])

    assert subset.env_ids == ["env2"]
    assert len(subset) == 8


def test_feature_dataset_validation():

    features = {"a": np.zeros((7, 20, 16)), "b": np.zeros((7, 10, 16))}
    targets = {"a": np.zeros((5, 2, 3)), "b": np.zeros((5, 2, 3))}

    with pytest.raises(DataError):
        FeatureDataset(features, targets, {"a": "env"})

    with pytest.raises(DataError):
        FeatureDataset(features, targets, {"a": "env", "b": "env"})


def test_feature_dataset_from_manifest(tmp_path, rng):

    clip_dir = tmp_path.joinpath("clips")
    clip_dir.mkdir()

    entries = []
    for idx, env_id in enumerate(["room_a", "room_a", "room_b"]):

        stem = clip_dir.joinpath(f"{env_id}_clip{idx:04d}")
        sf.write(stem.with_suffix(".wav"), (0.1 * rng.normal(size=(24000, 4))).astype(np.float32), 24000, subtype="FLOAT")

        labels = [Label(frame, 1, 0, Direction.from_azel(30, 0, degrees=True).to_cartesian()) for frame in range(2, 5)]
        write_label_csv(stem.with_suffix(".csv"), labels)

        entries.append(ClipEntry(f"clips/{stem.name}.wav", f"clips/{stem.name}.csv", env_id))

    manifest = DatasetManifest(
        clips=tuple(entries), env_ids=("room_a", "room_b"), clip_s=1.0, n_classes=2, root=tmp_path,
    )

    cache = tmp_path.joinpath("features")
    dataset = FeatureDataset.from_manifest(manifest, cache_dir=cache)

    assert dataset.input_shape == (7, 76, 64)
    assert dataset.target_shape == (10, 2, 3)
    assert len(list(cache.glob("*.feat"))) == 3

    cid = dataset.clip_ids("room_b")[0]
    assert np.linalg.norm(dataset.targets(cid)[3, 1]) == pytest.approx(1.0)
    assert np.all(dataset.targets(cid)[:, 0] == 0)
    assert len(dataset.labels(cid)) == 3

    # second pass served from the cache
    cached = FeatureDataset.from_manifest(manifest, cache_dir=cache)
    x, _ = dataset.batch(dataset.clip_ids())
    x_cached, _ = cached.batch(cached.clip_ids())
    assert torch.equal(x, x_cached)


def test_feature_dataset_unreadable_audio(tmp_path):

    tmp_path.joinpath("clip.wav").write_bytes(b"not a wave file")
    tmp_path.joinpath("clip.csv").write_text("")

    manifest = DatasetManifest(
        clips=(ClipEntry("clip.wav", "clip.csv", "room_a"),), env_ids=("room_a",), clip_s=1.0, n_classes=2, root=tmp_path,
    )

    with pytest.raises(DataError, match="cannot read audio"):
        FeatureDataset.from_manifest(manifest)
