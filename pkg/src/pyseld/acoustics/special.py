"""Legendre functions, spherical Hankel derivatives and rigid-sphere responses.

All functions evaluate in 64-bit floats and broadcast over array arguments."""
from __future__ import annotations

import math

import numpy as np
from scipy import special

from pyseld.exceptions import DomainError, SingularityError, UnsupportedOrderError
from .geometry import SphereSpec, Wavenumber

KR_MIN = 1e-4


def _check_unit_interval(x) -> np.ndarray:
    """validate and clip arguments to [-1, 1]"""

    x = np.asarray(x, dtype=np.float64)
    if np.any(np.abs(x) > 1 + 1e-12):
        raise DomainError(f"argument outside [-1, 1]: max |x| = {np.max(np.abs(x))}")

    return np.clip(x, -1.0, 1.0)


def _check_order(n: int) -> int:

    if n < 0 or int(n) != n:
        raise UnsupportedOrderError(f"order must be a non-negative integer, got {n}")

    return int(n)


def legendre_table(n_max: int, x) -> np.ndarray:
    """P_0 .. P_n_max at x by Bonnet's recurrence, shape (n_max + 1, *x.shape)"""

    n_max = _check_order(n_max)
    x = _check_unit_interval(x)

    table = np.empty((n_max + 1,) + x.shape)
    table[0] = 1.0
    if n_max > 0:
        table[1] = x

    # (n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1}
    for n in range(1, n_max):
        table[n + 1] = ((2 * n + 1) * x * table[n] - n * table[n - 1]) / (n + 1)

    return table


def legendre(n: int, x):
    """Legendre polynomial P_n(x)"""

    value = legendre_table(n, x)[n]
    return float(value) if value.ndim == 0 else value


def assoc_legendre(n: int, m: int, x):
    """Associated Legendre function P_n^m(x) with Condon-Shortley phase"""

    n = _check_order(n)
    if m < 0 or m > n:
        raise UnsupportedOrderError(f"require 0 <= m <= n, got n={n}, m={m}")

    x = _check_unit_interval(x)
    value = special.lpmv(m, n, x)

    return float(value) if np.ndim(value) == 0 else value


def sph_hankel1(n: int, x):
    """spherical Hankel function of the first kind"""
    return special.spherical_jn(n, x) + 1j * special.spherical_yn(n, x)


def sph_hankel1_deriv(n: int, x):
    """derivative of the spherical Hankel function of the first kind"""

    n = _check_order(n)
    x = np.asarray(x, dtype=np.float64)

    if np.any(x <= 0):
        raise SingularityError(f"spherical Hankel derivative undefined for x <= 0, got min {x.min()}")

    # h_0' = -h_1, h_n' = h_{n-1} - (n+1)/x h_n
    with np.errstate(over="ignore", invalid="ignore"):
        if n == 0:
            value = -sph_hankel1(1, x)
        else:
            value = sph_hankel1(n - 1, x) - (n + 1) / x * sph_hankel1(n, x)

    return complex(value) if value.ndim == 0 else value


def mode_strength(n: int, kr):
    """rigid-baffle mode strength b_n(kR) = i / ((kR)^2 h_n'(kR))"""

    kr = np.asarray(kr, dtype=np.float64)
    if np.any(kr <= KR_MIN):
        raise SingularityError(
            f"mode strength requires kR > {KR_MIN}, got {kr.min()}; regularize DC bins first"
        )

    # overflow of h_n' drives b_n to zero
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        value = 1j / (kr**2 * sph_hankel1_deriv(n, kr))

    value = np.where(np.isfinite(value), value, 0.0)
    return complex(value) if value.ndim == 0 else value


def truncation_order(kr) -> int:
    """series length max(4, ceil(e kR / 2) + 4)"""

    kr_max = float(np.max(np.asarray(kr, dtype=np.float64)))
    return max(4, math.ceil(math.e * kr_max / 2) + 4)


def regularize_kr(kr) -> np.ndarray:
    """clamp bins at or below KR_MIN to the response just above KR_MIN"""
    return np.maximum(np.asarray(kr, dtype=np.float64), np.nextafter(KR_MIN, np.inf))


def modal_coefficients(kr, n_max: int) -> np.ndarray:
    """(-i)^n (2n+1) b_n(kR) for n = 0 .. n_max, shape (n_max + 1, *kr.shape)"""

    kr = np.asarray(kr, dtype=np.float64)
    coefs = np.empty((n_max + 1,) + kr.shape, dtype=np.complex128)

    for n in range(n_max + 1):
        coefs[n] = ((-1j) ** n) * (2 * n + 1) * mode_strength(n, kr)

    return coefs


def rigid_sphere_response(
    k: Wavenumber | float | np.ndarray,
    sphere: SphereSpec,
    psi,
    n_max: int | None = None,
):
    """Pressure on a rigid sphere for a unit plane wave.

    Parameters
    ----------
    k : Wavenumber, float or ndarray
        Wavenumber(s) in rad/m.
    sphere : SphereSpec
        Rigid baffle.
    psi : float or ndarray
        Angle between the direction the wave arrives from
        and the observation point, broadcast against k. Zero
        faces the source.
    n_max : int, default None
        Series truncation, defaults to the truncation rule.

    Return
    ------
    response : complex or ndarray
        H(k, psi) = sum_n (-i)^n (2n+1) b_n(kR) P_n(cos psi)."""

    if isinstance(k, Wavenumber):
        k = k.k

    kr = np.asarray(k, dtype=np.float64) * sphere.radius
    psi = np.asarray(psi, dtype=np.float64)

    if np.any((psi < -1e-12) | (psi > np.pi + 1e-12)):
        raise DomainError("psi must lie in [0, pi]")

    # default truncation
    if n_max is None:
        n_max = truncation_order(kr)
    n_max = _check_order(n_max)

    # broadcast and sum the series
    kr, psi = np.broadcast_arrays(kr, psi)
    coefs = modal_coefficients(kr, n_max)
    legendres = legendre_table(n_max, np.cos(psi))

    value = np.sum(coefs * legendres, axis=0)
    return complex(value) if value.ndim == 0 else value
