"""Legendre, spherical Hankel and rigid-sphere mode strength"""
import cmath
import math

import numpy as np
import pytest

from pyseld.acoustics import (
    SphereSpec,
    assoc_legendre,
    legendre,
    legendre_table,
    mode_strength,
    regularize_kr,
    rigid_sphere_response,
    sph_hankel1,
    sph_hankel1_deriv,
    truncation_order,
)
from pyseld.exceptions import DomainError, SingularityError, UnsupportedOrderError


@pytest.mark.parametrize("n, x, expected", [(0, 0.3, 1.0), (1, -0.7, -0.7), (2, 0.5, -0.125)])
def test_legendre_values(n, x, expected):
    assert legendre(n, x) == pytest.approx(expected, abs=1e-14)


def test_legendre_endpoints():
    for n in range(12):
        assert legendre(n, 1.0) == pytest.approx(1.0)
        assert legendre(n, -1.0) == pytest.approx((-1) ** n)


def test_bonnet_residual():

    x = np.linspace(-1, 1, 41)
    table = legendre_table(15, x)

    for n in range(1, 15):
        residual = (n + 1) * table[n + 1] - (2 * n + 1) * x * table[n] + n * table[n - 1]
        assert np.max(np.abs(residual)) < 1e-12


def test_legendre_domain():

    with pytest.raises(DomainError):
        legendre(2, 1.5)

    with pytest.raises(UnsupportedOrderError):
        legendre(-1, 0.2)


def test_assoc_legendre_condon_shortley():

    assert assoc_legendre(1, 1, 0.0) == pytest.approx(-1.0)
    assert assoc_legendre(2, 1, 0.5) == pytest.approx(-3 * 0.5 * math.sqrt(0.75))

    with pytest.raises(UnsupportedOrderError):
        assoc_legendre(1, 2, 0.0)


def test_hankel_derivative_order_zero():

    for x in (0.3, 1.0, 4.2):
        expected = cmath.exp(1j * x) * (x + 1j) / x**2
        assert sph_hankel1_deriv(0, x) == pytest.approx(expected, rel=1e-12)


def test_hankel_wronskian():

    # j_n y_n' - j_n' y_n = 1 / x^2
    for n in range(5):
        for x in (0.5, 2.0, 7.5):
            h, dh = sph_hankel1(n, x), sph_hankel1_deriv(n, x)
            wronskian = (h.real * dh.imag - dh.real * h.imag)
            assert wronskian == pytest.approx(1 / x**2, rel=1e-10)


def test_hankel_derivative_singular():
    with pytest.raises(SingularityError):
        sph_hankel1_deriv(1, 0.0)


def test_mode_strength_singularity():

    with pytest.raises(SingularityError):
        mode_strength(0, 1e-6)

    assert np.all(regularize_kr([0.0, 1e-6, 1.0]) > 1e-4)


def test_mode_strength_decays():
    assert abs(mode_strength(0, 10.0)) < abs(mode_strength(0, 1.0))


def test_truncation_rule():
    assert truncation_order(0.1) == 5
    assert truncation_order(0.0) == 4
    assert truncation_order(10.0) == math.ceil(math.e * 5) + 4


def test_rigid_sphere_order_zero():

    sphere = SphereSpec(radius=0.042)
    k = 2.0 / sphere.radius

    value = rigid_sphere_response(k, sphere, 0.7, n_max=0)
    assert value == pytest.approx(mode_strength(0, 2.0), rel=1e-12)


@pytest.mark.parametrize("kr", [0.5, 1.0, 2.0, 3.0])
def test_rigid_sphere_front_louder_than_back(kr):

    sphere = SphereSpec(radius=0.042)
    k = kr / sphere.radius

    front = abs(rigid_sphere_response(k, sphere, 0.0))
    back = abs(rigid_sphere_response(k, sphere, np.pi))

    assert front > back


def test_rigid_sphere_convergence():

    sphere = SphereSpec(radius=0.042)
    k = 2.0 / sphere.radius
    psi = np.linspace(0, np.pi, 7)

    low = rigid_sphere_response(k, sphere, psi, n_max=10)
    high = rigid_sphere_response(k, sphere, psi, n_max=30)

    assert np.max(np.abs(low - high)) < 1e-6


def test_rigid_sphere_psi_domain():
    with pytest.raises(DomainError):
        rigid_sphere_response(10.0, SphereSpec(radius=0.042), 4.0)
