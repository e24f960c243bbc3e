"""spherical acoustics primitives"""
from .geometry import SPEED_OF_SOUND, Direction, SphereSpec, Wavenumber, wrap_azimuth
from .harmonics import (
    acn,
    acn_orders,
    complex_to_real_matrix,
    real_sph_harmonic,
    sh_matrix,
    sn3d_gains,
    sph_harmonic,
)
from .special import (
    KR_MIN,
    assoc_legendre,
    legendre,
    legendre_table,
    modal_coefficients,
    mode_strength,
    regularize_kr,
    rigid_sphere_response,
    sph_hankel1,
    sph_hankel1_deriv,
    truncation_order,
)

__all__ = [
    "SPEED_OF_SOUND",
    "KR_MIN",
    "Direction",
    "SphereSpec",
    "Wavenumber",
    "wrap_azimuth",
    "acn",
    "acn_orders",
    "assoc_legendre",
    "complex_to_real_matrix",
    "legendre",
    "legendre_table",
    "modal_coefficients",
    "mode_strength",
    "real_sph_harmonic",
    "regularize_kr",
    "rigid_sphere_response",
    "sh_matrix",
    "sn3d_gains",
    "sph_harmonic",
    "sph_hankel1",
    "sph_hankel1_deriv",
    "truncation_order",
]
