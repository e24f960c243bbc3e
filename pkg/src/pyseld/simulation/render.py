"""frequency-domain rendering of array impulse responses and FOA encoding"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import signal, sparse
from scipy.fft import irfft, rfft, rfftfreq

from pyseld.acoustics import (
    Direction,
    complex_to_real_matrix,
    legendre_table,
    modal_coefficients,
    mode_strength,
    regularize_kr,
    sh_matrix,
    sn3d_gains,
    truncation_order,
)
from pyseld.acoustics.geometry import SPEED_OF_SOUND
from pyseld.exceptions import GeometryError, IllConditionedError, ShapeError
from pyseld.logger import get_modulelogger

from .array import MicArraySpec
from .room import ImageSource, RoomSpec, enumerate_image_sources, sabine_rt60

logger = get_modulelogger(__name__)

# terms of the fractional-delay phase expansion, |omega * delta| <= pi / 2
PHASE_TERMS = 24

# white-noise gain limit of the modal equalizer
MAX_WHITE_NOISE_GAIN_DB = 20.0

# raised-cosine roll-off from this fraction of Nyquist to Nyquist
ROLLOFF_START = 0.7

# dipole crossover band in kR, the layout aliases above kR = 1
DIPOLE_CROSSOVER = (0.7, 1.4)

# zero-phase encoding filters span -ENCODER_HALF_TAPS .. ENCODER_HALF_TAPS
ENCODER_HALF_TAPS = 32
ENCODER_DESIGN_NFFT = 1024


def _fft_length(length: int) -> int:
    """power of two covering twice the response length"""
    return int(2 ** np.ceil(np.log2(max(2 * length, 2))))


def _frequency_kr(nfft: int, fs: int, radius: float, c: float) -> np.ndarray:
    """regularized kR per rfft bin"""
    return regularize_kr(2 * np.pi * rfftfreq(nfft, 1 / fs) / c * radius)


def _raised_cosine(x: np.ndarray, start: float, stop: float) -> np.ndarray:
    """one below start, zero above stop"""

    ramp = np.clip((np.asarray(x, dtype=np.float64) - start) / (stop - start), 0.0, 1.0)
    return 0.5 * (1 + np.cos(np.pi * ramp))


def nyquist_rolloff(nfft: int) -> np.ndarray:
    """band-limiting gain per rfft bin"""
    return _raised_cosine(np.arange(nfft // 2 + 1) / (nfft / 2), ROLLOFF_START, 1.0)


@dataclass(frozen=True)
class Srir:
    """Spatial room impulse response of one source position"""

    array_ir: np.ndarray
    foa_ir: np.ndarray
    source_doa: Direction
    rt60_nominal: float
    fs: int = 24000
    source_position: tuple[float, float, float] | None = None

    def __post_init__(self):

        if self.array_ir.shape != self.foa_ir.shape:
            raise ShapeError(f"array and FOA responses differ: {self.array_ir.shape} vs {self.foa_ir.shape}")

    @property
    def length(self) -> int:
        """response length in samples"""
        return self.foa_ir.shape[-1]


def render_array_rir(
    images: Sequence[ImageSource],
    array: MicArraySpec,
    fs: int = 24000,
    nfft: int | None = None,
    c: float = SPEED_OF_SOUND,
) -> np.ndarray:
    """Render capsule impulse responses of an image source set.

    Every image contributes gain / (4 pi d) exp(-i k d) H(k, psi) per
    capsule, with H the rigid-sphere response. Spectra follow the
    forward-FFT sign convention, so the response enters conjugated.
    The fractional part of each delay is applied through a converged
    Taylor expansion of its phase term. A raised-cosine roll-off toward
    Nyquist keeps every arrival compact in time.

    Parameters
    ----------
    images : sequence of ImageSource
        Image sources, delays relative to the array center.
    array : MicArraySpec
        Microphone array.
    fs : int, default 24000
        Sample rate.
    nfft : int, default None
        Transform length, defaults to a power of two covering
        twice the response length.
    c : float, default 343
        Speed of sound in m/s.

    Return
    ------
    array_ir : ndarray
        Capsule responses, shape (4, L)."""

    if not images:
        raise GeometryError("no image sources to render")

    # image geometry relative to the array center
    positions = np.array([image.position for image in images], dtype=np.float64)
    gains = np.array([image.gain for image in images], dtype=np.float64)

    rel = positions - np.asarray(array.center)
    dist = np.linalg.norm(rel, axis=1)
    if np.any(dist <= array.radius):
        raise GeometryError("image source inside the array baffle")

    cospsi = (rel / dist[:, None]) @ array.capsule_units.T

    # response length covers the last arrival and the baffle spread
    delays = dist / c * fs
    length = int(np.ceil(delays.max() + 2 * array.radius / c * fs)) + 2 * ENCODER_HALF_TAPS

    # default transform length
    if nfft is None:
        nfft = _fft_length(length)

    if delays.max() >= nfft:
        logger.warning("Max delay of %.0f samples exceeds nfft=%d, response aliases", delays.max(), nfft)
    length = min(length, nfft)

    # modal coefficients per bin
    kr = _frequency_kr(nfft, fs, array.radius, c)
    n_max = truncation_order(kr)
    coefs = modal_coefficients(kr, n_max)

    # per capsule and order image weights, rows (capsule, order)
    weights = gains / (4 * np.pi * dist)
    legendres = legendre_table(n_max, cospsi)
    values = (weights[None, :, None] * legendres).transpose(2, 0, 1)
    values = values.reshape(-1, len(images))

    # integer and fractional delays
    integer = np.round(delays).astype(np.int64)
    frac = delays - integer
    onehot = sparse.csr_matrix(
        (np.ones(len(images)), (np.arange(len(images)), np.mod(integer, nfft))),
        shape=(len(images), nfft),
    )

    # accumulate exp(-i w delta) term by term
    omega = 2 * np.pi * np.arange(kr.size) / nfft
    spectra = np.zeros((values.shape[0], kr.size), dtype=np.complex128)
    term = np.ones(kr.size, dtype=np.complex128)
    powered = values

    for order in range(PHASE_TERMS):

        if order > 0:
            term = term * (-1j * omega) / order
            powered = powered * frac

        trains = np.asarray(onehot.T @ powered.T)
        spectra += rfft(trains, axis=0).T * term

    # sum the rigid-sphere series per capsule
    spectra = spectra.reshape(len(array.capsule_dirs), n_max + 1, kr.size)
    capsules = np.einsum("nk,rnk->rk", np.conj(coefs), spectra) * nyquist_rolloff(nfft)

    return irfft(capsules, nfft, axis=-1)[:, :length]


def _encoder_response(array: MicArraySpec, nfft: int, fs: int, c: float) -> np.ndarray:
    """ideal per-bin capsule to ACN/SN3D matrices, shape (nfft // 2 + 1, 4, 4)"""

    # first order SH matrix of the capsules
    ymat = sh_matrix(array.capsule_dirs, order=1)
    condition = np.linalg.cond(ymat)
    if condition > 1e6:
        raise IllConditionedError(f"capsule layout is ill-conditioned (cond={condition:.3g})")

    pinv = np.linalg.pinv(ymat)

    # Tikhonov-regularized inverse mode strengths
    kr = _frequency_kr(nfft, fs, array.radius, c)
    max_gain = 10 ** (MAX_WHITE_NOISE_GAIN_DB / 20)
    beta = 1 / (4 * max_gain**2)

    inverse = []
    for n in (0, 1):
        strength = mode_strength(n, kr)
        inverse.append(np.conj(strength) / (np.abs(strength) ** 2 + beta) / (4 * np.pi * (-1j) ** n))

    # dipoles fade out where the layout aliases
    dipole = inverse[1] * _raised_cosine(kr, *DIPOLE_CROSSOVER)
    modal = np.stack([inverse[0], dipole, dipole, dipole], axis=1)

    # complex SH coefficients to real SN3D channels
    to_real = np.diag(sn3d_gains(1)) @ np.conj(complex_to_real_matrix(1))
    encoder = np.einsum("ca,ka,ar->kcr", to_real, modal, pinv)
    encoder *= nyquist_rolloff(nfft)[:, None, None]

    # forward-FFT sign convention
    return np.conj(encoder)


def foa_encoder(array: MicArraySpec, nfft: int, fs: int = 24000, c: float = SPEED_OF_SOUND) -> np.ndarray:
    """Per-bin responses of the capsule to ACN/SN3D encoding filters.

    The ideal encoder is designed on a fine grid and windowed to a
    zero-phase FIR of 2 * ENCODER_HALF_TAPS + 1 taps, so an encoded
    arrival spreads by at most ENCODER_HALF_TAPS samples each side.

    Parameters
    ----------
    array : MicArraySpec
        Microphone array.
    nfft : int
        Transform length the responses are sampled at.
    fs : int, default 24000
        Sample rate.
    c : float, default 343
        Speed of sound in m/s.

    Return
    ------
    encoder : ndarray
        Complex matrices, shape (nfft // 2 + 1, 4, 4)."""

    half = ENCODER_HALF_TAPS
    if nfft < 2 * half + 1:
        raise ShapeError(f"nfft={nfft} is shorter than the {2 * half + 1} encoder taps")

    taps = irfft(_encoder_response(array, ENCODER_DESIGN_NFFT, fs, c), ENCODER_DESIGN_NFFT, axis=0)
    window = signal.windows.hann(2 * half + 1)[:, None, None]

    # causal and anti-causal halves wrap around the transform
    kernel = np.zeros((nfft, 4, 4))
    kernel[: half + 1] = taps[: half + 1] * window[half:]
    kernel[-half:] = taps[-half:] * window[:half]

    return rfft(kernel, axis=0)


def encode_foa(
    array_ir: np.ndarray,
    array: MicArraySpec,
    fs: int = 24000,
    c: float = SPEED_OF_SOUND,
) -> np.ndarray:
    """Encode capsule signals to first-order Ambisonics (ACN/SN3D: W, Y, Z, X).

    Parameters
    ----------
    array_ir : ndarray
        Capsule signals, shape (4, L).
    array : MicArraySpec
        Microphone array that recorded the signals.
    fs : int, default 24000
        Sample rate.

    Return
    ------
    foa : ndarray
        Ambisonic signals, shape (4, L)."""

    array_ir = np.asarray(array_ir, dtype=np.float64)
    if array_ir.ndim != 2 or array_ir.shape[0] != 4:
        raise ShapeError(f"expected 4 capsule channels, got shape {array_ir.shape}")

    length = array_ir.shape[1]
    nfft = _fft_length(length + ENCODER_HALF_TAPS)

    spectra = rfft(array_ir, nfft, axis=-1)
    encoded = np.einsum("kcr,rk->ck", foa_encoder(array, nfft, fs, c), spectra)

    return irfft(encoded, nfft, axis=-1)[:, :length]


def simulate_srir(
    room: RoomSpec,
    array: MicArraySpec,
    src: Sequence[float],
) -> Srir:
    """Simulate the capsule and FOA responses for one source position.

    Parameters
    ----------
    room : RoomSpec
        Shoebox room.
    array : MicArraySpec
        Microphone array placed in the room.
    src : sequence of float
        Source position in m.

    Return
    ------
    srir : Srir
        Responses with direct-path DOA in the array frame."""

    # array must fit inside the room
    if not room.contains(array.center, margin=array.radius):
        raise GeometryError(f"array at {array.center} with radius {array.radius} does not fit the room")

    src = np.asarray(src, dtype=np.float64)
    if np.linalg.norm(src - np.asarray(array.center)) <= array.radius:
        raise GeometryError("source inside the array baffle")

    images = enumerate_image_sources(room, src, array.center)
    logger.debug("Rendering %d image sources in room '%s'", len(images), room.room_id)

    array_ir = render_array_rir(images, array, fs=room.fs, c=room.c)
    foa_ir = encode_foa(array_ir, array, fs=room.fs, c=room.c)

    return Srir(
        array_ir=array_ir,
        foa_ir=foa_ir,
        source_doa=Direction.from_cartesian(src - np.asarray(array.center)),
        rt60_nominal=sabine_rt60(room),
        fs=room.fs,
        source_position=tuple(float(x) for x in src),
    )
