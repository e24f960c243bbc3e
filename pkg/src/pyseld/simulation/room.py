"""shoebox rooms, image sources and reverberation time"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from pyseld.acoustics import SPEED_OF_SOUND, Direction
from pyseld.exceptions import DomainError, GeometryError
from pyseld.logger import get_modulelogger

logger = get_modulelogger(__name__)

SABINE_CONSTANT = 24 * np.log(10)


@dataclass(frozen=True)
class RoomSpec:
    """Shoebox room with per-wall energy absorption.

    Walls are ordered (x=0, x=Lx, y=0, y=Ly, z=0, z=Lz)."""

    dims: tuple[float, float, float]
    absorption: float | tuple[float, ...] = 0.3
    max_order: int = 10
    c: float = SPEED_OF_SOUND
    fs: int = 24000
    room_id: str = "room"

    def __post_init__(self):

        dims = tuple(float(dim) for dim in self.dims)
        if len(dims) != 3 or min(dims) <= 0:
            raise GeometryError(f"room dims must be 3 positive lengths, got {self.dims}")

        # broadcast scalar absorption to walls
        absorption = np.broadcast_to(np.asarray(self.absorption, dtype=np.float64), (6,))
        if np.any((absorption < 0) | (absorption > 1)):
            raise DomainError(f"absorption must lie in [0, 1], got {self.absorption}")

        if self.max_order < 0:
            raise DomainError(f"max_order must be non-negative, got {self.max_order}")

        if self.c <= 0 or self.fs <= 0:
            raise DomainError("speed of sound and sample rate must be positive")

        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "absorption", tuple(float(a) for a in absorption))

    @property
    def volume(self) -> float:
        """room volume in m3"""
        return float(np.prod(self.dims))

    @property
    def wall_areas(self) -> np.ndarray:
        """surface area per wall in m2"""

        lx, ly, lz = self.dims
        return np.array([ly * lz, ly * lz, lx * lz, lx * lz, lx * ly, lx * ly])

    @property
    def reflection(self) -> np.ndarray:
        """amplitude reflection coefficient per wall"""
        return np.sqrt(1 - np.asarray(self.absorption))

    def contains(self, point: Sequence[float], margin: float = 0.0) -> bool:
        """check if point lies strictly inside the room"""

        point = np.asarray(point, dtype=np.float64)
        return bool(np.all(point > margin) and np.all(point < np.asarray(self.dims) - margin))


@dataclass(frozen=True)
class ImageSource:
    """Virtual source mirrored over the room walls"""

    position: tuple[float, float, float]
    order: int
    gain: float
    delay_s: float
    doa: Direction = field(compare=False)


@dataclass(frozen=True)
class ImageSourceArrays:
    """Vectorized image source set"""

    positions: np.ndarray
    orders: np.ndarray
    gains: np.ndarray


def _axis_images(src: float, length: float, order: int, beta_low: float, beta_high: float):
    """lattice images along one axis with their reflection counts"""

    lattice = np.arange(-order, order + 1)
    n, q = np.meshgrid(lattice, [0, 1], indexing="ij")
    n, q = n.ravel(), q.ravel()

    # reflections on the low and high wall
    low, high = np.abs(n - q), np.abs(n)
    orders = low + high

    keep = orders <= order
    n, q, low, high, orders = n[keep], q[keep], low[keep], high[keep], orders[keep]

    positions = (1 - 2 * q) * src + 2 * n * length
    gains = beta_low ** low * beta_high ** high

    return positions, orders, gains


def image_source_arrays(room: RoomSpec, src: Sequence[float]) -> ImageSourceArrays:
    """all images up to max_order as arrays, zero-gain images dropped"""

    beta = room.reflection
    axes = [
        _axis_images(src[axis], room.dims[axis], room.max_order, beta[2 * axis], beta[2 * axis + 1])
        for axis in range(3)
    ]

    # combine axes
    grids = np.meshgrid(*(np.arange(len(pos)) for pos, _, _ in axes), indexing="ij")
    idx = [grid.ravel() for grid in grids]

    orders = sum(axes[axis][1][idx[axis]] for axis in range(3))
    keep = orders <= room.max_order
    idx = [i[keep] for i in idx]

    positions = np.stack([axes[axis][0][idx[axis]] for axis in range(3)], axis=1)
    gains = np.prod([axes[axis][2][idx[axis]] for axis in range(3)], axis=0)
    orders = orders[keep]

    # anechoic walls remove their images
    alive = gains > 0
    return ImageSourceArrays(positions[alive], orders[alive], gains[alive])


def _check_inside(room: RoomSpec, point: Sequence[float], name: str) -> np.ndarray:

    point = np.asarray(point, dtype=np.float64)
    if point.shape != (3,) or not room.contains(point):
        raise GeometryError(f"{name} {point.tolist()} outside room {room.dims}")

    return point


def enumerate_image_sources(
    room: RoomSpec, src: Sequence[float], mic_center: Sequence[float]
) -> list[ImageSource]:
    """image sources of src up to the room's max_order

    Parameters
    ----------
    room : RoomSpec
        Shoebox room.
    src : sequence of float
        Source position in m.
    mic_center : sequence of float
        Array center in m, reference for delays and DOAs.

    Return
    ------
    images : list of ImageSource
        Direct source first, distance attenuation is not included."""

    src = _check_inside(room, src, "source")
    mic_center = _check_inside(room, mic_center, "microphone")

    if np.allclose(src, mic_center):
        raise GeometryError("source coincides with the microphone center")

    arrays = image_source_arrays(room, src)
    rel = arrays.positions - mic_center
    dist = np.linalg.norm(rel, axis=1)

    # direct path first, then by distance
    order = np.lexsort((dist, arrays.orders))

    return [
        ImageSource(
            position=tuple(arrays.positions[i]),
            order=int(arrays.orders[i]),
            gain=float(arrays.gains[i]),
            delay_s=float(dist[i] / room.c),
            doa=Direction.from_cartesian(rel[i]),
        )
        for i in order
    ]


def sabine_rt60(room: RoomSpec) -> float:
    """nominal reverberation time by Sabine's formula"""

    area = float(room.wall_areas @ np.asarray(room.absorption))
    if area == 0:
        return float("inf")

    return SABINE_CONSTANT / room.c * room.volume / area


def absorption_for_rt60(rt60: float, dims: Sequence[float], c: float = SPEED_OF_SOUND) -> float:
    """uniform absorption that gives a Sabine reverberation time"""

    if rt60 <= 0:
        raise DomainError(f"target RT60 must be positive, got {rt60}")

    lx, ly, lz = dims
    volume = lx * ly * lz
    surface = 2 * (lx * ly + lx * lz + ly * lz)

    absorption = SABINE_CONSTANT / c * volume / (surface * rt60)
    if absorption > 1:
        raise DomainError(f"RT60 {rt60} s is unreachable in a {dims} room (absorption {absorption:.2f})")

    return float(absorption)


def schroeder_curve(ir: np.ndarray) -> np.ndarray:
    """energy decay curve in dB, channels summed"""

    energy = np.asarray(ir, dtype=np.float64) ** 2
    if energy.ndim > 1:
        energy = energy.reshape(-1, energy.shape[-1]).sum(axis=0)

    # backward integration
    edc = np.cumsum(energy[::-1])[::-1]
    if edc[0] <= 0:
        raise DomainError("impulse response has no energy")

    with np.errstate(divide="ignore"):
        return 10 * np.log10(edc / edc[0])


def estimate_rt60(ir: np.ndarray, fs: int, fit_range: tuple[float, float] = (-5.0, -25.0)) -> float:
    """reverberation time extrapolated from a linear fit of the decay curve"""

    curve = schroeder_curve(ir)
    upper, lower = fit_range

    # fit segment
    start = int(np.argmax(curve <= upper))
    stop = int(np.argmax(curve <= lower))
    if stop <= start + 1:
        raise DomainError(f"decay curve does not reach {lower} dB")

    times = np.arange(start, stop) / fs
    slope, _ = np.polyfit(times, curve[start:stop], 1)

    return float(-60.0 / slope)
