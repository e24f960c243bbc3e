"""procedural ambient noise and its diffuse spatialization"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
import pandas as pd
from scipy import signal
from scipy.fft import irfft, rfft, rfftfreq

from pyseld.exceptions import ConfigError, PreconditionError
from pyseld.logger import _PACKAGEPATH_
from pyseld.simulation import Srir
from pyseld.types import NoiseKind


@dataclass(frozen=True)
class NoiseType:
    """Ambient noise template"""

    name: str
    kind: NoiseKind
    f_lo: float
    f_hi: float
    modulation_hz: float


@lru_cache(maxsize=None)
def load_noise_types() -> dict[str, NoiseType]:
    """noise templates shipped with the package"""

    file = _PACKAGEPATH_.joinpath("data/noise_types.csv")
    frame = pd.read_csv(file, dtype={"name": str, "kind": str})

    return {row["name"]: NoiseType(**row) for row in frame.to_dict(orient="records")}


def _colored(size: int, exponent: float, rng: np.random.Generator, fs: int) -> np.ndarray:
    """noise with power spectrum proportional to 1/f^exponent"""

    spectrum = rfft(rng.standard_normal(size))
    freqs = rfftfreq(size, 1 / fs)
    freqs[0] = freqs[1] if size > 1 else 1.0

    return irfft(spectrum / freqs ** (exponent / 2), size)


def _bandpass(wave: np.ndarray, f_lo: float, f_hi: float, fs: int) -> np.ndarray:

    sos = signal.butter(4, [f_lo, min(f_hi, 0.45 * fs)], btype="bandpass", fs=fs, output="sos")
    return signal.sosfilt(sos, wave)


def generate_noise(
    noise_type: str,
    size: int,
    rng: np.random.Generator,
    fs: int = 24000,
) -> np.ndarray:
    """Generate unit-RMS mono ambient noise.

    Parameters
    ----------
    noise_type : str
        Name of a shipped noise template.
    size : int
        Number of samples.
    rng : Generator
        Random generator.
    fs : int, default 24000
        Sample rate.

    Return
    ------
    noise : ndarray
        Mono noise with unit RMS."""

    templates = load_noise_types()
    if noise_type not in templates:
        raise ConfigError(f"Unknown noise type '{noise_type}', expected one of {sorted(templates)}")

    tpl = templates[noise_type]
    t = np.arange(size) / fs

    if tpl.kind == "white":
        wave = rng.standard_normal(size)

    elif tpl.kind == "pink":
        wave = _colored(size, 1.0, rng, fs)

    elif tpl.kind == "brown":
        wave = _colored(size, 2.0, rng, fs)

    elif tpl.kind == "hum":
        harmonics = range(1, int(tpl.f_hi // tpl.f_lo) + 1)
        wave = sum(np.sin(2 * np.pi * k * tpl.f_lo * t + rng.uniform(0, 2 * np.pi)) / k for k in harmonics)
        wave = wave + 0.05 * rng.standard_normal(size)

    elif tpl.kind == "babble":
        wave = np.zeros(size)
        for _ in range(6):
            f0 = rng.uniform(tpl.f_lo, tpl.f_hi)
            voice = sum(np.sin(2 * np.pi * k * f0 * t) / k for k in range(1, 12))
            syllables = 0.5 * (1 + np.sin(2 * np.pi * tpl.modulation_hz * rng.uniform(0.7, 1.3) * t + rng.uniform(0, 2 * np.pi)))
            wave += voice * syllables

    elif tpl.kind == "machinery":
        rumble = _bandpass(rng.standard_normal(size), tpl.f_lo, tpl.f_hi, fs)
        rumble /= np.std(rumble) + 1e-12
        wave = rumble * (1 + 0.6 * np.sin(2 * np.pi * tpl.modulation_hz * t)) + np.sin(2 * np.pi * 2 * tpl.f_lo * t)

    elif tpl.kind == "rain":
        drops = (rng.random(size) < 400 / fs) * rng.standard_normal(size)
        wave = _bandpass(drops, tpl.f_lo, tpl.f_hi, fs) + 0.1 * _colored(size, 1.0, rng, fs)

    elif tpl.kind == "wind":
        gusts = 1 + 0.8 * np.sin(2 * np.pi * tpl.modulation_hz * t + rng.uniform(0, 2 * np.pi))
        wave = _bandpass(rng.standard_normal(size), tpl.f_lo, tpl.f_hi, fs) * gusts

    else:
        raise ConfigError(f"Unsupported noise kind: '{tpl.kind}'")

    return wave / (np.sqrt(np.mean(wave**2)) + 1e-12)


def late_tail(srir: Srir, offset_s: float = 0.005) -> np.ndarray:
    """FOA response after the direct sound, whole response if the tail is silent"""

    direct = int(np.argmax(np.abs(srir.foa_ir[0])))
    tail = srir.foa_ir.copy()
    tail[:, : direct + int(round(offset_s * srir.fs))] = 0.0

    if np.sum(tail**2) <= 1e-12 * np.sum(srir.foa_ir**2):
        return srir.foa_ir

    return tail


def diffuse_noise(
    noise: np.ndarray,
    srirs: Sequence[Srir],
    rng: np.random.Generator,
    size: int | None = None,
    n_directions: int = 8,
) -> np.ndarray:
    """Spatialize mono noise as a diffuse FOA field.

    Independent, circularly shifted copies of the noise are convolved with
    the late tails of randomly chosen responses and summed.

    Parameters
    ----------
    noise : ndarray
        Mono noise.
    srirs : sequence of Srir
        Responses of the environment.
    rng : Generator
        Random generator.
    size : int, default None
        Output length, defaults to the noise length.
    n_directions : int, default 8
        Number of responses summed.

    Return
    ------
    field : ndarray
        FOA noise, shape (4, size)."""

    if not srirs:
        raise PreconditionError("diffuse noise requires at least one response")

    noise = np.asarray(noise, dtype=np.float64)
    size = noise.size if size is None else size

    # tile noise to length
    reps = int(np.ceil(size / noise.size))
    noise = np.tile(noise, reps)[:size]

    picks = rng.choice(len(srirs), size=n_directions, replace=len(srirs) < n_directions)

    field = np.zeros((4, size))
    for pick in picks:
        segment = np.roll(noise, int(rng.integers(noise.size)))
        field += signal.fftconvolve(segment[None, :], late_tail(srirs[pick]), axes=-1)[:, :size]

    return field
