"""complex and real spherical harmonics"""
from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from pyseld.exceptions import UnsupportedOrderError
from .geometry import Direction
from .special import assoc_legendre


def acn(n: int, m: int) -> int:
    """ambisonic channel number"""
    return n * n + n + m


def acn_orders(order: int) -> list[tuple[int, int]]:
    """(n, m) pairs in ACN order up to order"""
    return [(n, m) for n in range(order + 1) for m in range(-n, n + 1)]


def _check_degree(n: int, m: int) -> None:

    if n < 0 or abs(m) > n:
        raise UnsupportedOrderError(f"require |m| <= n, got n={n}, m={m}")


def sph_harmonic(n: int, m: int, direction: Direction) -> complex:
    """orthonormal complex spherical harmonic Y_n^m with Condon-Shortley phase"""

    _check_degree(n, m)

    # negative orders by conjugate symmetry
    if m < 0:
        return (-1) ** (-m) * np.conj(sph_harmonic(n, -m, direction))

    norm = math.sqrt((2 * n + 1) / (4 * math.pi) * math.factorial(n - m) / math.factorial(n + m))
    legendre = assoc_legendre(n, m, math.cos(direction.theta))

    return complex(norm * legendre * np.exp(1j * m * direction.phi))


def real_sph_harmonic(n: int, m: int, direction: Direction, normalization: str = "sn3d") -> float:
    """real spherical harmonic, m < 0 pairs with sin(|m| phi) and m > 0 with cos(m phi)

    Parameters
    ----------
    n, m : int
        Degree and order.
    direction : Direction
        Evaluation direction.
    normalization : {'sn3d', 'n3d', 'orthonormal'}, default 'sn3d'
        Channel normalization."""

    _check_degree(n, m)

    # associated Legendre without the Condon-Shortley phase
    mu = abs(m)
    legendre = (-1) ** mu * assoc_legendre(n, mu, math.cos(direction.theta))

    # SN3D normalization
    value = math.sqrt((2 - (m == 0)) * math.factorial(n - mu) / math.factorial(n + mu)) * legendre
    value *= math.sin(mu * direction.phi) if m < 0 else math.cos(mu * direction.phi)

    if normalization == "sn3d":
        return float(value)
    if normalization == "n3d":
        return float(value * math.sqrt(2 * n + 1))
    if normalization == "orthonormal":
        return float(value * math.sqrt((2 * n + 1) / (4 * math.pi)))

    raise ValueError(f"Unsupported normalization: '{normalization}'")


def complex_to_real_matrix(order: int) -> np.ndarray:
    """orthonormal basis change T with Y_real = T @ Y_complex, ACN order"""

    pairs = acn_orders(order)
    matrix = np.zeros((len(pairs), len(pairs)), dtype=np.complex128)

    for row, (n, m) in enumerate(pairs):

        if m == 0:
            matrix[row, acn(n, 0)] = 1.0

        elif m > 0:
            matrix[row, acn(n, m)] = (-1) ** m / math.sqrt(2)
            matrix[row, acn(n, -m)] = 1 / math.sqrt(2)

        else:
            mu = -m
            matrix[row, acn(n, mu)] = (-1) ** mu / (1j * math.sqrt(2))
            matrix[row, acn(n, m)] = -1 / (1j * math.sqrt(2))

    return matrix


def sh_matrix(directions: Iterable[Direction], order: int = 1) -> np.ndarray:
    """complex SH matrix, rows directions, columns ACN channels"""

    pairs = acn_orders(order)
    return np.array([[sph_harmonic(n, m, d) for n, m in pairs] for d in directions])


def sn3d_gains(order: int = 1) -> np.ndarray:
    """orthonormal to SN3D channel scaling in ACN order"""
    return np.array([math.sqrt(4 * math.pi / (2 * n + 1)) for n, _ in acn_orders(order)])
