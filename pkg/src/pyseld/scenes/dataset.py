"""multi-environment dataset synthesis and its manifest"""
from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
import soundfile as sf
import yaml

from pyseld.exceptions import ConfigError, DataError, PreconditionError
from pyseld.logger import get_modulelogger
from pyseld.simulation import RoomSpec, Srir, absorption_for_rt60, build_srir_bank, default_array, random_source_positions
from pyseld.utils.general import relative_posix
from pyseld.utils.pool import call_threaded

from .events import generate_event, load_event_classes
from .labels import write_label_csv
from .mixing import place_events, synthesize_clip
from .noise import generate_noise, load_noise_types

logger = get_modulelogger(__name__)

MANIFEST_VERSION = 1


@dataclass(frozen=True)
class EnvironmentConfig:
    """One simulated environment.

    Absorption is either given directly or derived from a Sabine
    RT60 target."""

    env_id: str
    dims: tuple[float, float, float] = (6.0, 5.0, 3.0)
    absorption: float | None = None
    rt60: float | None = None
    noise_type: str | None = None
    snr_range: tuple[float, float] = (10.0, 15.0)
    n_clips: int = 16
    n_sources: int = 16
    max_order: int | None = None
    array_position: tuple[float, float, float] | None = None

    def __post_init__(self):

        if (self.absorption is None) == (self.rt60 is None):
            raise ConfigError(f"environment '{self.env_id}' needs exactly one of absorption or rt60")

        if self.n_clips < 1 or self.n_sources < 1:
            raise ConfigError(f"environment '{self.env_id}' needs at least one clip and one source")

        if self.noise_type is not None and self.noise_type not in load_noise_types():
            raise ConfigError(f"Unknown noise type '{self.noise_type}' in environment '{self.env_id}'")

        low, high = self.snr_range
        if low > high:
            raise ConfigError(f"snr_range must be ordered, got {self.snr_range}")

    def room(self, fs: int, max_order: int) -> RoomSpec:
        """shoebox room of the environment"""

        absorption = self.absorption
        if absorption is None:
            absorption = absorption_for_rt60(self.rt60, self.dims)

        return RoomSpec(
            dims=self.dims,
            absorption=absorption,
            max_order=max_order if self.max_order is None else self.max_order,
            fs=fs,
            room_id=self.env_id,
        )


@dataclass(frozen=True)
class SynthesisConfig:
    """Dataset generation settings"""

    environments: tuple[EnvironmentConfig, ...] = ()
    fs: int = 24000
    clip_s: float = 5.0
    n_classes: int = 5
    max_polyphony: int = 3
    events_per_clip: tuple[int, int] = (1, 4)
    max_order: int = 12
    array_radius: float = 0.042
    seed: int = 0
    workers: int | None = None

    def __post_init__(self):

        n_templates = len(load_event_classes())
        if not 1 <= self.n_classes <= n_templates:
            raise ConfigError(f"n_classes must lie in [1, {n_templates}], got {self.n_classes}")

        low, high = self.events_per_clip
        if not 0 <= low <= high:
            raise ConfigError(f"events_per_clip must be an ordered non-negative range, got {self.events_per_clip}")

        env_ids = [env.env_id for env in self.environments]
        if len(set(env_ids)) != len(env_ids):
            raise ConfigError("environment ids must be unique")

        if self.max_polyphony < 1 or self.clip_s <= 0:
            raise ConfigError("max_polyphony and clip_s must be positive")


@dataclass(frozen=True)
class ClipEntry:
    """Manifest row"""

    wav_path: str
    csv_path: str
    env_id: str

    @property
    def clip_id(self) -> str:
        """file stem shared by audio and labels"""
        return Path(self.wav_path).stem


@dataclass(frozen=True)
class DatasetManifest:
    """Index of a synthesized dataset, paths relative to root"""

    clips: tuple[ClipEntry, ...]
    env_ids: tuple[str, ...]
    fs: int = 24000
    clip_s: float = 5.0
    n_classes: int = 5
    environments: dict[str, dict] = field(default_factory=dict)
    root: Path | None = None

    def __post_init__(self):

        # disjoint partition of clips
        unknown = {clip.env_id for clip in self.clips} - set(self.env_ids)
        if unknown:
            raise DataError(f"clips reference unknown environments: {sorted(unknown)}")

        wavs = [clip.wav_path for clip in self.clips]
        if len(set(wavs)) != len(wavs):
            raise DataError("a clip appears more than once in the manifest")

    def __len__(self) -> int:
        return len(self.clips)

    def path(self, relpath: str) -> Path:
        """absolute path of a manifest entry"""
        return Path(relpath) if self.root is None else self.root.joinpath(relpath)

    def clips_by_env(self) -> dict[str, list[ClipEntry]]:
        """clips per environment sorted by clip id"""

        grouped = {env_id: [] for env_id in self.env_ids}
        for clip in self.clips:
            grouped[clip.env_id].append(clip)

        return {env_id: sorted(clips, key=lambda c: c.clip_id) for env_id, clips in grouped.items()}

    def subset(self, env_ids) -> DatasetManifest:
        """manifest restricted to environments"""

        env_ids = tuple(env_ids)
        missing = set(env_ids) - set(self.env_ids)
        if missing:
            raise ConfigError(f"environments not in manifest: {sorted(missing)}")

        return DatasetManifest(
            clips=tuple(clip for clip in self.clips if clip.env_id in env_ids),
            env_ids=env_ids,
            fs=self.fs,
            clip_s=self.clip_s,
            n_classes=self.n_classes,
            environments={key: self.environments[key] for key in env_ids if key in self.environments},
            root=self.root,
        )

    def to_dict(self) -> dict:
        """structured representation"""

        return {
            "version": MANIFEST_VERSION,
            "fs": self.fs,
            "clip_s": self.clip_s,
            "n_classes": self.n_classes,
            "env_ids": list(self.env_ids),
            "environments": self.environments,
            "clips": [asdict(clip) for clip in self.clips],
        }

    def write(self, path: str | os.PathLike) -> None:
        """write manifest as YAML"""

        with open(path, mode="w", encoding="utf-8") as file:
            yaml.safe_dump(self.to_dict(), file, sort_keys=False)

    @classmethod
    def load(cls, path: str | os.PathLike) -> DatasetManifest:
        """load manifest, paths resolved against its directory"""

        path = Path(path)
        try:
            with open(path, encoding="utf-8") as file:
                content = yaml.safe_load(file)
        except (OSError, yaml.YAMLError) as exc:
            raise DataError(f"cannot read manifest '{path}': {exc}") from exc

        if not isinstance(content, dict) or content.get("version") != MANIFEST_VERSION:
            raise DataError(f"'{path}' is not a version {MANIFEST_VERSION} manifest")

        manifest = cls(
            clips=tuple(ClipEntry(**clip) for clip in content["clips"]),
            env_ids=tuple(content["env_ids"]),
            fs=int(content["fs"]),
            clip_s=float(content["clip_s"]),
            n_classes=int(content["n_classes"]),
            environments=content.get("environments") or {},
            root=path.parent,
        )

        # paths must exist on load
        for clip in manifest.clips:
            for relpath in (clip.wav_path, clip.csv_path):
                if not manifest.path(relpath).is_file():
                    raise DataError(f"manifest entry '{relpath}' does not exist")

        return manifest


def _synthesize_job(
    clip_idx: int,
    env: EnvironmentConfig,
    env_idx: int,
    srirs: list[Srir],
    config: SynthesisConfig,
    out_dir: Path,
) -> ClipEntry:
    """synthesize and write one clip"""

    rng = np.random.default_rng([config.seed, env_idx, clip_idx])

    low, high = config.events_per_clip
    classes = rng.integers(config.n_classes, size=rng.integers(low, high + 1))
    events = [generate_event(int(idx), rng, fs=config.fs) for idx in classes]

    placed = place_events(events, config.clip_s, config.max_polyphony, rng)
    slots = [srirs[idx] for idx in rng.choice(len(srirs), size=len(placed))]

    noise, snr_db = None, None
    if env.noise_type is not None:
        noise = generate_noise(env.noise_type, int(round(config.clip_s * config.fs)), rng, fs=config.fs)
        snr_db = float(rng.uniform(*env.snr_range))

    clip = synthesize_clip(
        placed, slots, noise=noise, snr_db=snr_db, rng=rng,
        clip_s=config.clip_s, fs=config.fs, env_id=env.env_id, noise_srirs=srirs,
    )

    # audio and labels
    stem = out_dir.joinpath(f"{env.env_id}_clip{clip_idx:04d}")
    sf.write(stem.with_suffix(".wav"), clip.audio.T.astype(np.float32), config.fs, subtype="FLOAT")
    write_label_csv(stem.with_suffix(".csv"), clip.labels)

    return ClipEntry(stem.with_suffix(".wav").as_posix(), stem.with_suffix(".csv").as_posix(), env.env_id)


def environment_srirs(
    env: EnvironmentConfig,
    env_idx: int,
    config: SynthesisConfig,
    out_dir: str | os.PathLike,
) -> tuple[list[Srir], RoomSpec, pd.DataFrame]:
    """SRIR bank of one environment written to out_dir/srir/{env_id}"""

    room = env.room(config.fs, config.max_order)

    # array near the room center
    center = env.array_position or tuple(0.5 * d + 0.05 * (i - 1) for i, d in enumerate(room.dims))
    array = default_array(center, config.array_radius)

    rng = np.random.default_rng([config.seed, env_idx])
    positions = random_source_positions(room, array, env.n_sources, rng)

    srirs, index = build_srir_bank(room, array, positions, Path(out_dir).joinpath("srir", env.env_id), workers=config.workers)
    return [srirs[idx] for idx in sorted(srirs)], room, index


def build_environment(
    env: EnvironmentConfig,
    env_idx: int,
    config: SynthesisConfig,
    out_dir: str | os.PathLike,
) -> tuple[list[ClipEntry], dict]:
    """Simulate the SRIR bank and clips of one environment.

    Return
    ------
    clips, metadata : list of ClipEntry, dict
        Clip entries with absolute paths and the environment metadata."""

    out_dir = Path(out_dir)
    srirs, room, _ = environment_srirs(env, env_idx, config, out_dir)

    clip_dir = out_dir.joinpath("clips", env.env_id)
    clip_dir.mkdir(parents=True, exist_ok=True)

    jobs = {idx: {"clip_idx": idx} for idx in range(env.n_clips)}
    clips = call_threaded(
        _synthesize_job, jobs, workers=config.workers,
        env=env, env_idx=env_idx, srirs=srirs, config=config, out_dir=clip_dir,
    )

    metadata = {
        "rt60_nominal": float(srirs[0].rt60_nominal),
        "dims": [float(d) for d in room.dims],
        "absorption": float(np.mean(room.absorption)),
        "noise_type": env.noise_type,
        "snr_range": list(env.snr_range) if env.noise_type else None,
    }

    logger.info("Synthesized %d clips for environment '%s'", len(clips), env.env_id)
    return list(clips.values()), metadata


def build_dataset(config: SynthesisConfig, out_dir: str | os.PathLike) -> DatasetManifest:
    """Synthesize every environment and write the manifest.

    Parameters
    ----------
    config : SynthesisConfig
        Environments and generation settings.
    out_dir : path
        Output root, receives srir/, clips/ and manifest.yaml.

    Return
    ------
    manifest : DatasetManifest
        Manifest rooted at out_dir."""

    if not config.environments:
        raise PreconditionError("dataset config lists no environments")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    entries, environments = [], {}
    for env_idx, env in enumerate(config.environments):

        clips, metadata = build_environment(env, env_idx, config, out_dir)
        environments[env.env_id] = metadata

        entries.extend(
            ClipEntry(relative_posix(c.wav_path, out_dir), relative_posix(c.csv_path, out_dir), c.env_id)
            for c in clips
        )

    manifest = DatasetManifest(
        clips=tuple(entries),
        env_ids=tuple(env.env_id for env in config.environments),
        fs=config.fs,
        clip_s=config.clip_s,
        n_classes=config.n_classes,
        environments=environments,
        root=out_dir,
    )

    manifest.write(out_dir.joinpath("manifest.yaml"))
    return manifest
