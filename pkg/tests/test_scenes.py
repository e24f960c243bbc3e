"""Events, placement, labels, mixing and dataset synthesis"""
import numpy as np
import pytest

from pyseld.acoustics import Direction
from pyseld.exceptions import CapacityError, ConfigError, DataError, DomainError, PreconditionError
from pyseld.scenes import (
    LADDER_RT60S,
    DatasetManifest,
    DryEvent,
    EnvironmentConfig,
    Label,
    SynthesisConfig,
    build_dataset,
    diffuse_noise,
    generate_event,
    generate_noise,
    load_event_classes,
    load_noise_types,
    max_overlap,
    noise_set,
    place_events,
    read_label_csv,
    reverb_ladder,
    scene_labels,
    synthesize_clip,
    write_label_csv,
)
from pyseld.simulation import Srir


def _impulse_srir(direction: Direction, length: int = 480, gain: float = 0.2, delay: int = 10) -> Srir:
    """FOA plane-wave impulse with a short exponential tail"""

    foa = np.zeros((4, length))
    x, y, z = direction.to_cartesian()
    foa[:, delay] = gain * np.array([1.0, y, z, x])

    tail = np.random.default_rng(delay).normal(size=(4, length - delay - 20)) * 0.01
    foa[:, delay + 20:] += tail * np.exp(-np.arange(length - delay - 20) / 100)

    return Srir(array_ir=foa.copy(), foa_ir=foa, source_doa=direction, rt60_nominal=0.3)


def _event(duration_s: float, class_idx: int = 0, fs: int = 24000) -> DryEvent:
    size = int(duration_s * fs)
    return DryEvent(waveform=0.5 * np.sin(np.arange(size) / 10), class_idx=class_idx, fs=fs)


@pytest.mark.parametrize("class_idx", range(8))
def test_generated_events_peak_below_one(class_idx, rng):

    event = generate_event(class_idx, rng)
    template = load_event_classes()[class_idx]

    assert 0 < np.max(np.abs(event.waveform)) <= 1
    assert template.min_duration_s - 1e-3 <= event.duration_s <= template.max_duration_s + 1e-3


def test_unknown_event_class(rng):
    with pytest.raises(ConfigError):
        generate_event(42, rng)


def test_dry_event_validation():

    with pytest.raises(DomainError):
        DryEvent(waveform=np.full(10, 2.0), class_idx=0)

    with pytest.raises(DomainError):
        DryEvent(waveform=np.zeros(0), class_idx=0)


@pytest.mark.parametrize("noise_type", sorted(load_noise_types()))
def test_noise_unit_rms(noise_type, rng):

    noise = generate_noise(noise_type, 24000, rng)

    assert noise.shape == (24000,)
    assert np.sqrt(np.mean(noise**2)) == pytest.approx(1.0, rel=1e-6)


def test_unknown_noise_type(rng):
    with pytest.raises(ConfigError):
        generate_noise("traffic", 100, rng)


def test_label_csv_round_trip(tmp_path):

    labels = [
        Label(0, 1, 0, Direction.from_azel(-180, 0, degrees=True).to_cartesian()),
        Label(3, 0, 0, Direction.from_azel(45, -30, degrees=True).to_cartesian()),
        Label(3, 0, 1, Direction.from_azel(-90, 60, degrees=True).to_cartesian()),
    ]

    path = tmp_path.joinpath("clip.csv")
    write_label_csv(path, labels)

    rows = path.read_text().splitlines()
    assert rows[0] == "0,1,0,180,0"
    assert read_label_csv(path) == labels


def test_empty_label_file(tmp_path):

    path = tmp_path.joinpath("empty.csv")
    write_label_csv(path, [])

    assert read_label_csv(path) == []


def test_malformed_label_file(tmp_path):

    path = tmp_path.joinpath("bad.csv")
    path.write_text("0,1,zero,10,10\n")

    with pytest.raises(DataError):
        read_label_csv(path)


def test_label_requires_unit_doa():
    with pytest.raises(DomainError):
        Label(0, 0, 0, [1.0, 1.0, 0.0])


def test_place_events_within_clip(rng):

    events = [_event(0.5), _event(0.8), _event(0.3)]
    placed = place_events(events, 2.0, max_polyphony=3, rng=rng)

    assert [item.srir_slot for item in placed] == [0, 1, 2]
    for item in placed:
        assert 0 <= item.onset_s <= 2.0 - item.event.duration_s + 1e-9


def test_place_events_monophonic(rng):

    events = [_event(0.4) for _ in range(4)]
    placed = place_events(events, 2.0, max_polyphony=1, rng=rng)

    assert max_overlap([(item.onset_s, item.offset_s) for item in placed]) == 1


def test_place_events_respects_polyphony(rng):

    events = [_event(d) for d in rng.uniform(0.3, 1.0, size=10)]
    placed = place_events(events, 5.0, max_polyphony=3, rng=rng)

    assert max_overlap([(item.onset_s, item.offset_s) for item in placed]) <= 3


def test_place_events_capacity(rng):

    with pytest.raises(CapacityError):
        place_events([_event(2.5)], 2.0, max_polyphony=1, rng=rng)

    with pytest.raises(CapacityError):
        place_events([_event(1.5), _event(1.5)], 2.0, max_polyphony=1, rng=rng)

    with pytest.raises(PreconditionError):
        place_events([_event(0.5)], 2.0, max_polyphony=0, rng=rng)


def test_scene_labels_follow_direct_path(rng):

    directions = [Direction.from_azel(30, 10, degrees=True), Direction.from_azel(-100, -20, degrees=True)]
    srirs = [_impulse_srir(direction) for direction in directions]
    placed = place_events([_event(0.5, 0), _event(0.6, 0)], 2.0, max_polyphony=2, rng=rng)

    labels = scene_labels(placed, srirs, 2.0)
    assert labels

    for label in labels:
        assert 0 <= label.frame < 20
        assert np.linalg.norm(label.doa) == pytest.approx(1.0)

    # frame centers inside [onset, offset)
    first = [label for label in labels if np.allclose(label.doa, directions[0].to_cartesian())]
    onset, offset = placed[0].onset_s, placed[0].offset_s
    assert [label.frame for label in first] == [f for f in range(20) if onset <= (f + 0.5) * 0.1 < offset]


def test_overlapping_same_class_gets_new_track():

    srirs = [_impulse_srir(Direction.from_azel(0, 0, degrees=True)), _impulse_srir(Direction.from_azel(90, 0, degrees=True))]
    placed = place_events([_event(1.0, 2), _event(1.0, 2)], 2.0, max_polyphony=2, rng=0)

    labels = scene_labels(placed, srirs, 2.0)
    shared = {label.frame for label in labels if label.track_idx == 1}

    intervals = [(item.onset_s, item.offset_s) for item in placed]
    if max_overlap(intervals) == 2:
        assert shared


def test_clip_snr(rng):

    srirs = [_impulse_srir(Direction.from_azel(az, 0, degrees=True)) for az in (0, 90, 180)]
    placed = place_events([_event(0.8), _event(0.5, 1)], 2.0, max_polyphony=2, rng=rng)

    clean = synthesize_clip(placed, srirs, clip_s=2.0)
    noisy = synthesize_clip(
        placed, srirs, noise=generate_noise("pink", 48000, rng), snr_db=10.0, rng=rng, clip_s=2.0,
    )

    assert clean.normalization_gain == noisy.normalization_gain == 1.0

    residual = noisy.audio - clean.audio
    snr = 10 * np.log10(np.mean(clean.audio**2) / np.mean(residual**2))
    assert 9.5 <= snr <= 10.5

    assert noisy.labels == clean.labels
    assert noisy.n_frames == 20


def test_labeled_frames_exceed_silence_floor(rng):

    srirs = [_impulse_srir(Direction.from_azel(az, 0, degrees=True)) for az in (0, 90, 180)]
    placed = place_events([_event(0.5), _event(0.6, 1)], 3.0, max_polyphony=2, rng=rng)

    clip = synthesize_clip(placed, srirs, noise=generate_noise("pink", 72000, rng), snr_db=10.0, rng=rng, clip_s=3.0)

    hop = int(0.1 * 24000)
    energy = np.sum(clip.audio.reshape(4, clip.n_frames, hop) ** 2, axis=(0, 2))

    active = np.zeros(clip.n_frames, dtype=bool)
    active[[label.frame for label in clip.labels]] = True

    # median of the frames without events
    floor = np.median(energy[~active])

    assert active.any() and (~active).sum() > active.sum()
    assert np.all(energy[active] > floor)


def test_build_dataset_is_reproducible(tmp_path):

    config = SynthesisConfig(
        environments=(
            EnvironmentConfig(
                env_id="noisy", dims=(5.0, 4.0, 3.0), rt60=0.4, noise_type="pink",
                snr_range=(10.0, 12.0), n_clips=2, n_sources=2,
            ),
        ),
        clip_s=2.0, n_classes=3, max_polyphony=2, events_per_clip=(1, 2), max_order=1, seed=11,
    )

    first = build_dataset(config, tmp_path.joinpath("first"))
    second = build_dataset(config, tmp_path.joinpath("second"))

    assert first.clips == second.clips
    for clip in first.clips:
        for relpath in (clip.wav_path, clip.csv_path):
            assert first.path(relpath).read_bytes() == second.path(relpath).read_bytes()


def test_clip_normalization():

    srirs = [_impulse_srir(Direction.from_azel(0, 0, degrees=True), gain=5.0)]
    placed = place_events([_event(0.5)], 1.0, max_polyphony=1, rng=0)

    clip = synthesize_clip(placed, srirs, clip_s=1.0)

    assert np.max(np.abs(clip.audio)) <= 0.99 + 1e-12
    assert clip.normalization_gain < 1


def test_synthesize_clip_preconditions():

    srirs = [_impulse_srir(Direction.from_azel(0, 0, degrees=True))]
    placed = place_events([_event(0.5)], 1.0, max_polyphony=1, rng=0)

    with pytest.raises(PreconditionError):
        synthesize_clip(placed, srirs, noise=np.ones(10), clip_s=1.0)

    with pytest.raises(PreconditionError):
        synthesize_clip(placed, [], clip_s=1.0)


def test_diffuse_noise_shape(rng):

    srirs = [_impulse_srir(Direction.from_azel(az, 0, degrees=True)) for az in (0, 120, -120)]
    field = diffuse_noise(rng.normal(size=1000), srirs, rng, size=2500)

    assert field.shape == (4, 2500)
    assert np.all(np.isfinite(field))

    with pytest.raises(PreconditionError):
        diffuse_noise(np.ones(10), [], rng)


def test_reverb_ladder():

    rooms = reverb_ladder()
    rt60s = [room.rt60 for room in rooms]

    assert len(rooms) == 8 == len(LADDER_RT60S)
    assert rt60s[0] == pytest.approx(0.4)
    assert rt60s[-1] == pytest.approx(2.5)
    assert all(b > a for a, b in zip(rt60s, rt60s[1:]))
    assert len({room.dims for room in rooms}) == 1

    with pytest.raises(ConfigError):
        reverb_ladder(rt60s=(0.5, 0.4))


def test_noise_set():

    rooms = noise_set(6, seed=3)

    assert len({room.noise_type for room in rooms}) == 6
    assert noise_set(6, seed=3) == rooms

    with pytest.raises(ConfigError):
        noise_set(len(load_noise_types()) + 1)


def test_environment_validation():

    with pytest.raises(ConfigError):
        EnvironmentConfig(env_id="room")

    with pytest.raises(ConfigError):
        EnvironmentConfig(env_id="room", rt60=0.5, absorption=0.3)

    with pytest.raises(ConfigError):
        EnvironmentConfig(env_id="room", rt60=0.5, noise_type="traffic")


def test_synthesis_validation():

    with pytest.raises(ConfigError):
        SynthesisConfig(n_classes=0)

    env = EnvironmentConfig(env_id="room", rt60=0.5)
    with pytest.raises(ConfigError):
        SynthesisConfig(environments=(env, env))


def test_build_dataset(tmp_path):

    environments = (
        EnvironmentConfig(env_id="dry", dims=(4.0, 3.5, 2.8), rt60=0.3, n_clips=2, n_sources=2),
        EnvironmentConfig(
            env_id="noisy", dims=(5.0, 4.0, 3.0), rt60=0.5, noise_type="pink",
            snr_range=(10.0, 12.0), n_clips=2, n_sources=2,
        ),
    )
    config = SynthesisConfig(
        environments=environments, clip_s=2.0, n_classes=3, max_polyphony=2,
        events_per_clip=(1, 2), max_order=2, seed=5,
    )

    manifest = build_dataset(config, tmp_path)

    assert len(manifest) == 4
    assert manifest.env_ids == ("dry", "noisy")
    assert {env: len(clips) for env, clips in manifest.clips_by_env().items()} == {"dry": 2, "noisy": 2}
    assert manifest.environments["noisy"]["noise_type"] == "pink"

    # relative paths survive a reload
    loaded = DatasetManifest.load(tmp_path.joinpath("manifest.yaml"))
    assert loaded.clips == manifest.clips
    assert all(loaded.path(clip.wav_path).is_file() for clip in loaded.clips)
    assert tmp_path.joinpath("srir", "dry", "srir_index.csv").is_file()

    assert loaded.subset(["noisy"]).env_ids == ("noisy",)
    with pytest.raises(ConfigError):
        loaded.subset(["missing"])


def test_manifest_load_errors(tmp_path):

    path = tmp_path.joinpath("manifest.yaml")
    path.write_text("version: 99\n")

    with pytest.raises(DataError):
        DatasetManifest.load(path)
