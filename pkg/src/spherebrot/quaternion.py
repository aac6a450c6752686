"""Hamilton quaternions: products, norms, polar form, De Moivre powers and
rotation by conjugation.

Values are immutable dataclasses of Python floats.  ``Quaternion`` carries the
scalar part ``w`` and the ``i``, ``j``, ``k`` coefficients ``x``, ``y``, ``z``;
``PureQuaternion`` drops the scalar part and doubles as a point of 3D space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator


@dataclass(frozen=True)
class Quaternion:
    w: float
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __iter__(self) -> Iterator[float]:
        yield from (self.w, self.x, self.y, self.z)

    def __add__(self, other: Quaternion) -> Quaternion:
        return Quaternion(self.w + other.w, self.x + other.x,
                          self.y + other.y, self.z + other.z)

    def __sub__(self, other: Quaternion) -> Quaternion:
        return Quaternion(self.w - other.w, self.x - other.x,
                          self.y - other.y, self.z - other.z)

    def __neg__(self) -> Quaternion:
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return qmul(self, other)
        return Quaternion(self.w * other, self.x * other,
                          self.y * other, self.z * other)

    def __rmul__(self, scalar: float) -> Quaternion:
        return self * scalar

    def __abs__(self) -> float:
        return qnorm(self)

    def conjugate(self) -> Quaternion:
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def inverse(self) -> Quaternion:
        n2 = self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
        if n2 == 0.0:
            raise ZeroDivisionError("zero quaternion has no inverse")
        return Quaternion(self.w / n2, -self.x / n2, -self.y / n2, -self.z / n2)

    @property
    def vector(self) -> PureQuaternion:
        return PureQuaternion(self.x, self.y, self.z)

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in self)


@dataclass(frozen=True)
class PureQuaternion:
    x: float
    y: float
    z: float

    def __iter__(self) -> Iterator[float]:
        yield from (self.x, self.y, self.z)

    def __add__(self, other: PureQuaternion) -> PureQuaternion:
        return PureQuaternion(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: PureQuaternion) -> PureQuaternion:
        return PureQuaternion(self.x - other.x, self.y - other.y, self.z - other.z)

    def __neg__(self) -> PureQuaternion:
        return PureQuaternion(-self.x, -self.y, -self.z)

    def __mul__(self, scalar: float) -> PureQuaternion:
        return PureQuaternion(self.x * scalar, self.y * scalar, self.z * scalar)

    __rmul__ = __mul__

    def __abs__(self) -> float:
        return self.norm()

    def norm(self) -> float:
        return math.hypot(self.x, self.y, self.z)

    def as_quaternion(self) -> Quaternion:
        return Quaternion(0.0, self.x, self.y, self.z)

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in self)


ONE = Quaternion(1.0)
I = Quaternion(0.0, 1.0, 0.0, 0.0)
J = Quaternion(0.0, 0.0, 1.0, 0.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)


@dataclass(frozen=True)
class PolarForm:
    """``modulus * (cos(angle_phi) + axis * sin(angle_phi))``."""

    modulus: float
    angle_phi: float
    axis: PureQuaternion

    def to_quaternion(self) -> Quaternion:
        s = self.modulus * math.sin(self.angle_phi)
        return Quaternion(self.modulus * math.cos(self.angle_phi),
                          s * self.axis.x, s * self.axis.y, s * self.axis.z)


# axis used when the vector part vanishes (real quaternions)
DEGENERATE_AXIS = PureQuaternion(0.0, 0.0, 1.0)


def qmul(q1: Quaternion, q2: Quaternion) -> Quaternion:
    a1, b1, c1, d1 = q1
    a2, b2, c2, d2 = q2
    return Quaternion(
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 + c1 * a2 + d1 * b2 - b1 * d2,
        a1 * d2 + d1 * a2 + b1 * c2 - c1 * b2,
    )


def qnorm(q: Quaternion) -> float:
    return math.hypot(q.w, q.x, q.y, q.z)


def to_polar(q: Quaternion) -> PolarForm:
    """Polar form with ``angle_phi`` in [0, pi].

    A zero vector part has no natural axis; the k axis is used, with
    ``angle_phi`` 0 for a non-negative real and pi for a negative one.
    """
    modulus = qnorm(q)
    vnorm = math.hypot(q.x, q.y, q.z)
    if vnorm == 0.0:
        phi = math.pi if q.w < 0.0 else 0.0
        return PolarForm(modulus, phi, DEGENERATE_AXIS)
    axis = PureQuaternion(q.x / vnorm, q.y / vnorm, q.z / vnorm)
    return PolarForm(modulus, math.atan2(vnorm, q.w), axis)


def qpow_demoivre(q: Quaternion, n: int) -> Quaternion:
    if n < 0:
        raise ValueError(f"power must be >= 0, got {n}")
    p = to_polar(q)
    return PolarForm(p.modulus ** n, n * p.angle_phi, p.axis).to_quaternion()


def qpow(q: Quaternion, n: int) -> Quaternion:
    """Repeated Hamilton product; reference for :func:`qpow_demoivre`."""
    if n < 0:
        raise ValueError(f"power must be >= 0, got {n}")
    out = ONE
    for _ in range(n):
        out = qmul(out, q)
    return out


def rotate(p: PureQuaternion, u: PureQuaternion, phi: float) -> PureQuaternion:
    """Rotate ``p`` about ``u`` through ``2 * phi`` via ``r p r^-1``."""
    un = u.norm()
    if un == 0.0 or not math.isfinite(un):
        raise ValueError("rotation axis must be a finite nonzero vector")
    s = math.sin(phi) / un
    r = Quaternion(math.cos(phi), u.x * s, u.y * s, u.z * s)
    out = qmul(qmul(r, p.as_quaternion()), r.inverse())
    if abs(out.w) > 1e-12 * max(p.norm(), math.ulp(1.0)):
        raise ArithmeticError(f"conjugation left a scalar part {out.w!r}")
    return out.vector
