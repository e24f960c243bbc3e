"""procedural dry sound events"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import pandas as pd
from scipy import signal

from pyseld.exceptions import ConfigError, DomainError
from pyseld.logger import _PACKAGEPATH_
from pyseld.types import EventKind


@dataclass(frozen=True)
class EventClass:
    """Spectral template of a target class"""

    class_idx: int
    name: str
    kind: EventKind
    f_lo: float
    f_hi: float
    min_duration_s: float
    max_duration_s: float
    modulation_hz: float


@lru_cache(maxsize=None)
def load_event_classes() -> tuple[EventClass, ...]:
    """class templates shipped with the package"""

    file = _PACKAGEPATH_.joinpath("data/event_classes.csv")
    frame = pd.read_csv(file, dtype={"name": str, "kind": str})

    return tuple(EventClass(**row) for row in frame.to_dict(orient="records"))


@dataclass(frozen=True, eq=False)
class DryEvent:
    """Mono dry event of one class"""

    waveform: np.ndarray
    class_idx: int
    fs: int = 24000

    def __post_init__(self):

        if self.waveform.ndim != 1 or self.waveform.size == 0:
            raise DomainError("dry event waveform must be a nonempty mono signal")

        if np.max(np.abs(self.waveform)) > 1:
            raise DomainError("dry event peak amplitude exceeds 1")

        if self.class_idx < 0:
            raise DomainError(f"class index must be non-negative, got {self.class_idx}")

    @property
    def duration_s(self) -> float:
        """duration in s"""
        return self.waveform.size / self.fs


def _envelope(size: int, fs: int, ramp_s: float = 0.01) -> np.ndarray:
    """raised-cosine fade in and out"""
    return signal.windows.tukey(size, alpha=min(1.0, 2 * ramp_s * fs / size))


def _tone(template: EventClass, t: np.ndarray, rng: np.random.Generator) -> np.ndarray:

    freq = rng.uniform(template.f_lo, template.f_hi)
    tremolo = 1 + 0.5 * np.sin(2 * np.pi * template.modulation_hz * t)

    return tremolo * np.sin(2 * np.pi * freq * t + rng.uniform(0, 2 * np.pi))


def _chirp(template: EventClass, t: np.ndarray, rng: np.random.Generator) -> np.ndarray:

    f0, f1 = rng.uniform(template.f_lo, template.f_hi, size=2)
    return signal.chirp(t, f0=f0, t1=t[-1], f1=f1, method="logarithmic")


def _harmonic(template: EventClass, t: np.ndarray, rng: np.random.Generator) -> np.ndarray:

    f0 = rng.uniform(template.f_lo, template.f_hi)
    vibrato = 0.02 * f0 / max(template.modulation_hz, 1e-3) * np.sin(2 * np.pi * template.modulation_hz * t)
    phase = 2 * np.pi * f0 * t + vibrato

    # harmonics below 10 kHz with 1/k rolloff
    harmonics = [k for k in range(1, 21) if k * f0 < 10000]
    return sum(np.sin(k * phase) / k for k in harmonics)


def _noise_burst(template: EventClass, t: np.ndarray, rng: np.random.Generator, fs: int) -> np.ndarray:

    sos = signal.butter(4, [template.f_lo, min(template.f_hi, 0.45 * fs)], btype="bandpass", fs=fs, output="sos")
    return signal.sosfilt(sos, rng.standard_normal(t.size))


def _click_train(template: EventClass, t: np.ndarray, rng: np.random.Generator, fs: int) -> np.ndarray:

    # decaying resonances at a jittered rate
    freq = rng.uniform(template.f_lo, template.f_hi)
    period = 1 / template.modulation_hz
    decay = np.exp(-np.arange(int(0.05 * fs)) / (0.008 * fs))
    click = decay * np.sin(2 * np.pi * freq * np.arange(decay.size) / fs)

    wave = np.zeros(t.size)
    onset = rng.uniform(0, period / 2)
    while onset < t[-1]:
        start = int(onset * fs)
        stop = min(t.size, start + click.size)
        wave[start:stop] += click[: stop - start]
        onset += period * rng.uniform(0.8, 1.2)

    return wave


def generate_event(
    class_idx: int,
    rng: np.random.Generator,
    fs: int = 24000,
    duration_s: float | None = None,
) -> DryEvent:
    """Generate a dry event from the class template.

    Parameters
    ----------
    class_idx : int
        Target class index.
    rng : Generator
        Random generator.
    fs : int, default 24000
        Sample rate.
    duration_s : float, default None
        Fixed duration, drawn from the template range by default.

    Return
    ------
    event : DryEvent
        Peak-normalized event."""

    templates = load_event_classes()
    if not 0 <= class_idx < len(templates):
        raise ConfigError(f"no event template for class {class_idx} ({len(templates)} available)")

    template = templates[class_idx]

    # duration and time axis
    if duration_s is None:
        duration_s = rng.uniform(template.min_duration_s, template.max_duration_s)
    t = np.arange(int(round(duration_s * fs))) / fs

    if template.kind == "tone":
        wave = _tone(template, t, rng)
    elif template.kind == "chirp":
        wave = _chirp(template, t, rng)
    elif template.kind == "harmonic":
        wave = _harmonic(template, t, rng)
    elif template.kind == "noise_burst":
        wave = _noise_burst(template, t, rng, fs)
    elif template.kind == "click_train":
        wave = _click_train(template, t, rng, fs)
    else:
        raise ConfigError(f"Unsupported event kind: '{template.kind}'")

    # fade and normalize
    wave = wave * _envelope(t.size, fs)
    peak = np.max(np.abs(wave))
    level = rng.uniform(0.4, 0.9)

    return DryEvent(waveform=wave / peak * level if peak > 0 else wave, class_idx=class_idx, fs=fs)
