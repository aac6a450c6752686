"""Spherical coordinates of pure quaternions and the spherical products.

Every product re-derives the canonical ``(rho, theta, phi)`` of its operands
from Cartesian components, combines radii and angles, and evaluates the
result back in Cartesian form.  Combined angles are only reduced by an exact
``fmod`` against the float ``2 pi`` before the trigonometric calls, so that
e.g. ``2 * pi`` evaluates with ``sin == 0`` and orbits on the k axis stay on it.

The ``*_arrays`` functions are elementwise numpy versions of the same
formulas, used by the grid renderers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quaternion import PureQuaternion

TWO_PI = 2.0 * math.pi

IDENTITY = PureQuaternion(0.0, 0.0, 1.0)


@dataclass(frozen=True)
class SphericalTriple:
    """``rho`` >= 0, azimuth ``theta`` in [0, 2pi), polar angle ``phi`` in [0, pi]."""

    rho: float
    theta: float
    phi: float


def to_spherical(q: PureQuaternion) -> SphericalTriple:
    x, y, z = q
    rxy = math.hypot(x, y)
    rho = math.hypot(rxy, z)
    if rho == 0.0:
        return SphericalTriple(0.0, 0.0, 0.0)
    if x == 0.0 and y == 0.0:
        # poles: theta fixed at 0, phi exactly 0 or pi
        return SphericalTriple(rho, 0.0, 0.0 if z > 0.0 else math.pi)
    # atan2 form of arccos(z / rho); stays accurate next to the poles
    phi = math.atan2(rxy, z)
    if phi == 0.0 or phi == math.pi:
        # xy part below rounding: treat as a pole
        return SphericalTriple(rho, 0.0, phi)
    theta = math.atan2(y, x)
    if theta < 0.0:
        theta += TWO_PI
        if theta >= TWO_PI:
            theta = 0.0
    theta += 0.0  # drop a negative zero
    return SphericalTriple(rho, theta, phi)


def _evaluate(r: float, theta: float, phi: float) -> PureQuaternion:
    theta = math.fmod(theta, TWO_PI)
    phi = math.fmod(phi, TWO_PI)
    s = math.sin(phi)
    return PureQuaternion(r * s * math.cos(theta), r * s * math.sin(theta),
                          r * math.cos(phi))


def from_spherical(s: SphericalTriple) -> PureQuaternion:
    return _evaluate(s.rho, s.theta, s.phi)


def sprod(q1: PureQuaternion, q2: PureQuaternion) -> PureQuaternion:
    """Spherical product: radii multiply, both angles add."""
    s1 = to_spherical(q1)
    s2 = to_spherical(q2)
    return _evaluate(s1.rho * s2.rho, s1.theta + s2.theta, s1.phi + s2.phi)


def spow(q: PureQuaternion, n: int) -> PureQuaternion:
    """Spherical power ``sp_n``; ``spow(q, 0)`` is the identity ``k``."""
    if n < 0:
        raise ValueError(f"spherical power must be >= 0, got {n}")
    if n == 0:
        return IDENTITY
    s = to_spherical(q)
    return _evaluate(s.rho ** n, n * s.theta, n * s.phi)


def sprod_ab(q: PureQuaternion, a: float, b: float) -> PureQuaternion:
    """Squared-radius product with ``phi`` scaled by ``a`` and ``theta`` by ``b``."""
    s = to_spherical(q)
    return _evaluate(s.rho ** 2, b * s.theta, a * s.phi)


def spherical_inverse(q: PureQuaternion, tol: float = 1e-14) -> PureQuaternion | None:
    """Inverse ``k / c`` of ``c k``; ``None`` for every other pure quaternion."""
    if abs(q.x) > tol or abs(q.y) > tol or q.z == 0.0:
        return None
    return PureQuaternion(0.0, 0.0, 1.0 / q.z)


# -- array versions ---------------------------------------------------------

def to_spherical_arrays(x, y, z):
    """Elementwise :func:`to_spherical`; returns ``(rho, theta, phi)`` arrays."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    rxy = np.hypot(x, y)
    rho = np.hypot(rxy, z)
    pole = (x == 0.0) & (y == 0.0)
    phi = np.arctan2(rxy, z)
    at_pole = pole & (rho != 0.0)
    phi[at_pole] = np.where(z[at_pole] > 0.0, 0.0, np.pi)
    phi[rho == 0.0] = 0.0
    theta = np.arctan2(y, x)
    theta[theta < 0.0] += TWO_PI
    theta[(theta >= TWO_PI) | pole | (phi == 0.0) | (phi == np.pi)] = 0.0
    theta += 0.0
    return rho, theta, phi


def _evaluate_arrays(r, theta, phi):
    theta = np.fmod(theta, TWO_PI)
    phi = np.fmod(phi, TWO_PI)
    s = np.sin(phi)
    return r * s * np.cos(theta), r * s * np.sin(theta), r * np.cos(phi)


def spow_arrays(x, y, z, n: int):
    if n == 0:
        shape = np.shape(x)
        return np.zeros(shape), np.zeros(shape), np.ones(shape)
    rho, theta, phi = to_spherical_arrays(x, y, z)
    return _evaluate_arrays(rho ** n, n * theta, n * phi)


def sprod_ab_arrays(x, y, z, a: float, b: float):
    rho, theta, phi = to_spherical_arrays(x, y, z)
    return _evaluate_arrays(rho ** 2, b * theta, a * phi)
