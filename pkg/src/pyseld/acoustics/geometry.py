"""wavenumbers, spheres and directions"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from pyseld.exceptions import DomainError, GeometryError

SPEED_OF_SOUND = 343.0


def wrap_azimuth(phi: float) -> float:
    """wrap angle to (-pi, pi]"""

    phi = float(np.remainder(phi + np.pi, 2 * np.pi) - np.pi)
    return np.pi if phi == -np.pi else phi


@dataclass(frozen=True)
class Wavenumber:
    """Acoustic wavenumber k = 2*pi*f/c"""

    f: float
    c: float = SPEED_OF_SOUND

    def __post_init__(self):

        if self.c <= 0:
            raise DomainError(f"speed of sound must be positive, got {self.c}")

        if self.f < 0:
            raise DomainError(f"frequency must be non-negative, got {self.f}")

    @property
    def k(self) -> float:
        """wavenumber in rad/m"""
        return 2 * np.pi * self.f / self.c

    @classmethod
    def from_k(cls, k: float, c: float = SPEED_OF_SOUND) -> Wavenumber:
        """initialize from wavenumber"""
        return cls(f=k * c / (2 * np.pi), c=c)


@dataclass(frozen=True)
class SphereSpec:
    """Rigid spherical baffle"""

    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise GeometryError(f"sphere radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class Direction:
    """Direction with colatitude theta in [0, pi] and azimuth phi in (-pi, pi]"""

    theta: float
    phi: float

    def __post_init__(self):

        # tolerate rounding at the poles
        theta = float(self.theta)
        if -1e-12 <= theta < 0:
            theta = 0.0
        if np.pi < theta <= np.pi + 1e-12:
            theta = np.pi

        if not 0 <= theta <= np.pi:
            raise DomainError(f"colatitude outside [0, pi]: {self.theta}")

        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", wrap_azimuth(self.phi))

    @property
    def azimuth(self) -> float:
        """azimuth in rad"""
        return self.phi

    @property
    def elevation(self) -> float:
        """elevation in rad"""
        return np.pi / 2 - self.theta

    @classmethod
    def from_azel(cls, azimuth: float, elevation: float, degrees: bool = False) -> Direction:
        """initialize from azimuth and elevation"""

        if degrees:
            azimuth, elevation = np.deg2rad(azimuth), np.deg2rad(elevation)

        return cls(theta=np.pi / 2 - elevation, phi=azimuth)

    @classmethod
    def from_cartesian(cls, vector) -> Direction:
        """initialize from (not necessarily unit) 3-vector"""

        x, y, z = np.asarray(vector, dtype=np.float64)
        norm = np.sqrt(x * x + y * y + z * z)

        if norm == 0:
            raise GeometryError("direction of a zero vector is undefined")

        return cls(theta=np.arctan2(np.hypot(x, y), z), phi=np.arctan2(y, x))

    def to_azel(self, degrees: bool = False) -> tuple[float, float]:
        """azimuth and elevation"""

        if degrees:
            return float(np.rad2deg(self.azimuth)), float(np.rad2deg(self.elevation))

        return self.azimuth, self.elevation

    def to_cartesian(self) -> np.ndarray:
        """unit 3-vector"""

        return np.array([
            np.sin(self.theta) * np.cos(self.phi),
            np.sin(self.theta) * np.sin(self.phi),
            np.cos(self.theta),
        ])

    def angle_to(self, other: Direction) -> float:
        """great-circle angle in rad, exact down to identical directions"""

        u, v = self.to_cartesian(), other.to_cartesian()
        return float(np.arctan2(np.linalg.norm(np.cross(u, v)), u @ v))
