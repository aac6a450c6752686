"""Spherical products of pure quaternions and the 3D Mandelbrot sets they generate."""

from .dynamics import (
    EngineSpec,
    EscapeResult,
    escape_radius,
    goldenbulb,
    iterate_complex,
    iterate_quaternionic,
    iterate_spherical,
    iterate_spherical_ab,
    iterate_spherical_power,
    membership_quat_oracle,
    slice_point_to_quaternion,
)
from .quaternion import PolarForm, PureQuaternion, Quaternion, qmul, qnorm, qpow_demoivre, rotate, to_polar
from .spherical import (
    SphericalTriple,
    from_spherical,
    spherical_inverse,
    spow,
    sprod,
    sprod_ab,
    to_spherical,
)

__version__ = "0.1.0"
