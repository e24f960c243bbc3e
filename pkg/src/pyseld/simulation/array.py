"""rigid spherical microphone arrays"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from pyseld.acoustics import Direction, SphereSpec
from pyseld.exceptions import GeometryError

# regular tetrahedron, elevation arcsin(1/sqrt(3))
TETRAHEDRAL_ELEVATION = float(np.rad2deg(np.arcsin(1 / np.sqrt(3))))
TETRAHEDRAL_AZEL = (
    (45.0, TETRAHEDRAL_ELEVATION),
    (-45.0, -TETRAHEDRAL_ELEVATION),
    (135.0, -TETRAHEDRAL_ELEVATION),
    (-135.0, TETRAHEDRAL_ELEVATION),
)


def tetrahedral_directions() -> tuple[Direction, ...]:
    """capsule directions of the default layout"""
    return tuple(Direction.from_azel(az, el, degrees=True) for az, el in TETRAHEDRAL_AZEL)


@dataclass(frozen=True)
class MicArraySpec:
    """Four capsules on a rigid sphere"""

    center: tuple[float, float, float]
    radius: float = 0.042
    capsule_dirs: tuple[Direction, ...] = field(default_factory=tetrahedral_directions)

    def __post_init__(self):

        center = tuple(float(x) for x in self.center)
        if len(center) != 3:
            raise GeometryError(f"array center must be a 3-vector, got {self.center}")

        if not self.radius > 0:
            raise GeometryError(f"array radius must be positive, got {self.radius}")

        # pairwise distinct capsules
        units = np.array([d.to_cartesian() for d in self.capsule_dirs])
        if len(units) != 4:
            raise GeometryError(f"expected 4 capsules, got {len(units)}")

        cosines = units @ units.T - np.eye(len(units)) * 2
        if np.any(cosines > 1 - 1e-9):
            raise GeometryError("capsule directions must be pairwise distinct")

        object.__setattr__(self, "center", center)
        object.__setattr__(self, "capsule_dirs", tuple(self.capsule_dirs))

    @property
    def sphere(self) -> SphereSpec:
        """rigid baffle"""
        return SphereSpec(self.radius)

    @property
    def capsule_units(self) -> np.ndarray:
        """capsule unit vectors, shape (4, 3)"""
        return np.array([d.to_cartesian() for d in self.capsule_dirs])


def default_array(center: Sequence[float], radius: float = 0.042) -> MicArraySpec:
    """tetrahedral array at center"""
    return MicArraySpec(center=tuple(center), radius=radius)
