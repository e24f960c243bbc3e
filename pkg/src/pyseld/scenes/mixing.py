"""event placement and FOA scene mixing"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import signal

from pyseld.exceptions import CapacityError, PreconditionError
from pyseld.logger import get_modulelogger
from pyseld.simulation import Srir

from .events import DryEvent
from .labels import LABEL_HOP_S, Label
from .noise import diffuse_noise

logger = get_modulelogger(__name__)

RANDOM_ATTEMPTS = 100
GRID_STEP_S = 0.01
CLIP_PEAK = 0.99


@dataclass(frozen=True)
class PlacedEvent:
    """Dry event with onset and response slot"""

    event: DryEvent
    onset_s: float
    srir_slot: int

    @property
    def offset_s(self) -> float:
        """end of the direct sound"""
        return self.onset_s + self.event.duration_s


@dataclass(frozen=True, eq=False)
class SceneClip:
    """Labeled FOA clip of one environment"""

    audio: np.ndarray
    labels: list[Label]
    env_id: str = ""
    snr_db: float | None = None
    fs: int = 24000
    noise_gain: float | None = None
    normalization_gain: float = 1.0
    placed: list[PlacedEvent] = field(default_factory=list)

    @property
    def n_frames(self) -> int:
        """number of label frames"""
        return int(round(self.audio.shape[-1] / self.fs / LABEL_HOP_S))


def max_overlap(intervals: Sequence[tuple[float, float]]) -> int:
    """largest number of simultaneously active half-open intervals"""

    overlap = 0
    for start, _ in intervals:
        active = sum(onset <= start < offset for onset, offset in intervals)
        overlap = max(overlap, active)

    return overlap


def _fits(candidate: tuple[float, float], intervals: list[tuple[float, float]], max_polyphony: int) -> bool:

    start, stop = candidate
    nearby = [(a, b) for a, b in intervals if a < stop and start < b]
    if len(nearby) < max_polyphony:
        return True

    # overlap peaks at an interval start
    return max_overlap([*nearby, candidate]) <= max_polyphony


def place_events(
    events: Sequence[DryEvent],
    clip_s: float,
    max_polyphony: int,
    rng: np.random.Generator | int | None = None,
) -> list[PlacedEvent]:
    """Draw onsets that respect the polyphony limit.

    Each event is tried at random onsets first, then on a shuffled grid
    of 10 ms steps.

    Parameters
    ----------
    events : sequence of DryEvent
        Events in placement order.
    clip_s : float
        Clip length in s.
    max_polyphony : int
        Maximum number of simultaneous events.
    rng : Generator or int, default None
        Random generator or seed.

    Return
    ------
    placed : list of PlacedEvent
        Events with onsets, response slot equals placement index."""

    if clip_s <= 0:
        raise PreconditionError(f"clip length must be positive, got {clip_s}")

    if max_polyphony < 1:
        raise PreconditionError(f"max_polyphony must be at least 1, got {max_polyphony}")

    rng = np.random.default_rng(rng)

    placed, intervals = [], []
    for slot, event in enumerate(events):

        latest = clip_s - event.duration_s
        if latest < 0:
            raise CapacityError(f"event of {event.duration_s:.2f} s does not fit a {clip_s} s clip")

        candidates = rng.uniform(0, latest, size=RANDOM_ATTEMPTS)
        onset = next((float(t) for t in candidates if _fits((t, t + event.duration_s), intervals, max_polyphony)), None)

        # exhaustive grid fallback
        if onset is None:
            grid = rng.permutation(np.arange(0, latest + 1e-9, GRID_STEP_S))
            onset = next((float(t) for t in grid if _fits((t, t + event.duration_s), intervals, max_polyphony)), None)

        if onset is None:
            raise CapacityError(f"event {slot} cannot be placed under polyphony {max_polyphony}")

        intervals.append((onset, onset + event.duration_s))
        placed.append(PlacedEvent(event=event, onset_s=onset, srir_slot=slot))

    return placed


def scene_labels(
    placed: Sequence[PlacedEvent],
    srirs: Sequence[Srir],
    clip_s: float,
) -> list[Label]:
    """Frame labels of the direct sound of placed events.

    Frame f is active when its center lies in [onset, offset). Tracks
    take the smallest index free among overlapping events of the
    same class."""

    n_frames = int(round(clip_s / LABEL_HOP_S))
    centers = (np.arange(n_frames) + 0.5) * LABEL_HOP_S

    labels, tracks = [], []
    for idx, item in enumerate(placed):

        # free track index per class
        busy = {
            tracks[other] for other, prev in enumerate(placed[:idx])
            if prev.event.class_idx == item.event.class_idx
            and prev.onset_s < item.offset_s and item.onset_s < prev.offset_s
        }
        track = next(t for t in range(len(placed) + 1) if t not in busy)
        tracks.append(track)

        doa = srirs[item.srir_slot].source_doa.to_cartesian()
        active = np.flatnonzero((centers >= item.onset_s) & (centers < item.offset_s))
        labels.extend(Label(int(f), item.event.class_idx, track, doa) for f in active)

    return sorted(labels, key=lambda label: (label.frame, label.class_idx, label.track_idx))


def synthesize_clip(
    placed: Sequence[PlacedEvent],
    srirs: Sequence[Srir],
    noise: np.ndarray | None = None,
    snr_db: float | None = None,
    rng: np.random.Generator | int | None = None,
    clip_s: float = 5.0,
    fs: int = 24000,
    env_id: str = "",
    noise_srirs: Sequence[Srir] | None = None,
) -> SceneClip:
    """Mix spatialized events and diffuse noise into a labeled clip.

    Parameters
    ----------
    placed : sequence of PlacedEvent
        Placed events, each slot indexes srirs.
    srirs : sequence of Srir
        Responses assigned to the event slots.
    noise : ndarray, default None
        Mono ambient noise.
    snr_db : float, default None
        Target clip SNR, required with noise.
    rng : Generator or int, default None
        Random generator or seed.
    clip_s : float, default 5.0
        Clip length in s.
    fs : int, default 24000
        Sample rate.
    env_id : str, default ''
        Environment identifier.
    noise_srirs : sequence of Srir, default None
        Responses for the diffuse field, defaults to srirs.

    Return
    ------
    clip : SceneClip
        FOA audio with labels."""

    if (noise is None) != (snr_db is None):
        raise PreconditionError("snr_db must be given together with noise")

    for item in placed:
        if not 0 <= item.srir_slot < len(srirs):
            raise PreconditionError(f"event slot {item.srir_slot} has no assigned response")

    rng = np.random.default_rng(rng)
    size = int(round(clip_s * fs))

    # spatialized events
    audio = np.zeros((4, size))
    for item in placed:

        start = int(round(item.onset_s * fs))
        wet = signal.fftconvolve(item.event.waveform[None, :], srirs[item.srir_slot].foa_ir, axes=-1)

        stop = min(size, start + wet.shape[-1])
        audio[:, start:stop] += wet[:, : stop - start]

    # diffuse noise at target snr
    noise_gain = None
    if noise is not None:

        field = diffuse_noise(noise, noise_srirs or srirs, rng, size=size)
        p_signal, p_noise = np.mean(audio**2), np.mean(field**2)

        noise_gain = 1.0
        if p_signal > 0 and p_noise > 0:
            noise_gain = float(np.sqrt(p_signal / (p_noise * 10 ** (snr_db / 10))))

        audio += noise_gain * field

    # global normalization
    gain = 1.0
    peak = float(np.max(np.abs(audio)))
    if peak > 1:
        gain = CLIP_PEAK / peak
        audio *= gain
        logger.warning("Clip '%s' peaks at %.3f, normalized with gain %.4f", env_id, peak, gain)

    return SceneClip(
        audio=audio,
        labels=scene_labels(placed, srirs, clip_s),
        env_id=env_id,
        snr_db=snr_db,
        fs=fs,
        noise_gain=noise_gain,
        normalization_gain=gain,
        placed=list(placed),
    )
