"""Escape-time iteration for the complex, quaternionic and spherical families.

Every orbit starts at 0 and is advanced by ``q <- f(q) + c``.  The orbit
escapes at the first iterate whose norm is *strictly* greater than the
family's escape radius, so orbits that touch the radius (``c = -2``) stay
members.  ``iterations`` counts iterates: ``c = 1`` gives the complex orbit
1, 2, 5 and escapes at iteration 3.

Two layers are provided.  The scalar ``iterate_*`` functions follow one
orbit with the value types of :mod:`spherebrot.quaternion`.  The array
kernel :func:`escape_arrays` runs many orbits at once with numpy and is
what the renderers and the verification suite use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import spherical
from .quaternion import ONE, I, J, K, PureQuaternion, Quaternion, qmul, qnorm

FAMILIES = ("complex_mandelbrot", "quaternionic", "spherical",
            "spherical_power", "spherical_ab")

UNITS = {"1": ONE, "i": I, "j": J, "k": K}

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class EngineSpec:
    """Which set to iterate.

    ``m`` is used by ``spherical_power``, ``a``/``b`` (multipliers of phi and
    theta) by ``spherical_ab`` and ``slice_units`` by ``quaternionic``.
    """

    family: str = "spherical"
    m: int = 2
    a: float = 2.0
    b: float = 2.0
    slice_units: tuple[str, str, str] = ("1", "i", "j")

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.family == "spherical_power" and (int(self.m) != self.m or self.m < 2):
            raise ValueError(f"power m must be an integer >= 2, got {self.m}")
        object.__setattr__(self, "slice_units", tuple(self.slice_units))
        _check_units(self.slice_units)

    @property
    def radius(self) -> float:
        return escape_radius(self)

    def describe(self) -> str:
        if self.family == "spherical_power":
            return f"{self.family}(m={self.m})"
        if self.family == "spherical_ab":
            return f"{self.family}(a={self.a!r},b={self.b!r})"
        if self.family == "quaternionic":
            return f"{self.family}({','.join(self.slice_units)})"
        return self.family


def goldenbulb(power: float = 2.0) -> EngineSpec:
    """Goldenbulb of the given power: phi scaled by the golden ratio."""
    return EngineSpec("spherical_ab", a=GOLDEN_RATIO, b=power)


@dataclass(frozen=True)
class EscapeResult:
    """Outcome of one orbit.

    ``margin`` is the smallest distance between the norm of any computed
    iterate and the escape radius; near-zero margins flag orbits whose
    verdict hinges on rounding.
    """

    escaped: bool
    iterations: int
    final_norm: float
    margin: float = field(default=math.inf, compare=False)


def _check_units(units) -> None:
    if len(units) != 3:
        raise ValueError(f"slice needs three units, got {units!r}")
    for u in units:
        if u not in UNITS:
            raise ValueError(f"slice unit {u!r} not in {{1, i, j, k}}")
    if len(set(units)) != 3:
        raise ValueError(f"slice units must be pairwise distinct, got {units!r}")


def escape_radius(spec: EngineSpec) -> float:
    if spec.family == "spherical_power":
        return 2.0 ** (1.0 / (spec.m - 1))
    return 2.0


def _check_max_iter(max_iter: int) -> None:
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")


def iterate_complex(c: complex, max_iter: int) -> EscapeResult:
    _check_max_iter(max_iter)
    c = complex(c)
    z = 0j
    margin = math.inf
    for n in range(1, max_iter + 1):
        z = z * z + c
        r = abs(z)
        margin = min(margin, abs(r - 2.0))
        if r > 2.0:
            return EscapeResult(True, n, r, margin)
    return EscapeResult(False, max_iter, abs(z), margin)


def iterate_quaternionic(c: Quaternion, max_iter: int) -> EscapeResult:
    _check_max_iter(max_iter)
    q = Quaternion(0.0)
    margin = math.inf
    for n in range(1, max_iter + 1):
        q = qmul(q, q) + c
        r = qnorm(q)
        margin = min(margin, abs(r - 2.0))
        if r > 2.0:
            return EscapeResult(True, n, r, margin)
    return EscapeResult(False, max_iter, qnorm(q), margin)


def membership_quat_oracle(c: Quaternion, max_iter: int) -> bool:
    """Quaternionic membership through the complex reduction ``q0 + |vec| i``."""
    rho = math.sqrt(c.x * c.x + c.y * c.y + c.z * c.z)
    return not iterate_complex(complex(c.w, rho), max_iter).escaped


def _iterate_pure(step, c: PureQuaternion, radius: float, max_iter: int) -> EscapeResult:
    _check_max_iter(max_iter)
    q = PureQuaternion(0.0, 0.0, 0.0)
    margin = math.inf
    for n in range(1, max_iter + 1):
        q = step(q) + c
        r = q.norm()
        margin = min(margin, abs(r - radius))
        if r > radius:
            return EscapeResult(True, n, r, margin)
    return EscapeResult(False, max_iter, q.norm(), margin)


def iterate_spherical_power(c: PureQuaternion, m: int, max_iter: int) -> EscapeResult:
    if int(m) != m or m < 2:
        raise ValueError(f"power m must be an integer >= 2, got {m}")
    m = int(m)
    return _iterate_pure(lambda q: spherical.spow(q, m), c,
                         2.0 ** (1.0 / (m - 1)), max_iter)


def iterate_spherical(c: PureQuaternion, max_iter: int) -> EscapeResult:
    return iterate_spherical_power(c, 2, max_iter)


def iterate_spherical_ab(c: PureQuaternion, a: float, b: float,
                         max_iter: int) -> EscapeResult:
    return _iterate_pure(lambda q: spherical.sprod_ab(q, a, b), c, 2.0, max_iter)


def slice_point_to_quaternion(u: float, v: float, w: float,
                              slice_units=("1", "i", "j")) -> Quaternion:
    _check_units(tuple(slice_units))
    e1, e2, e3 = (UNITS[s] for s in slice_units)
    return e1 * u + e2 * v + e3 * w


def point_to_parameter(spec: EngineSpec, point):
    """Map a 3D sample point to the engine's parameter ``c``.

    The complex engine reads the first two coordinates as ``re + im i``; the
    quaternionic engine embeds the point in its slice; the spherical families
    read it as ``x i + y j + z k``.
    """
    x, y, z = (float(v) for v in point)
    if spec.family == "complex_mandelbrot":
        return complex(x, y)
    if spec.family == "quaternionic":
        return slice_point_to_quaternion(x, y, z, spec.slice_units)
    return PureQuaternion(x, y, z)


def iterate(spec: EngineSpec, c, max_iter: int) -> EscapeResult:
    """Dispatch to the scalar iterator of ``spec.family``."""
    if spec.family == "complex_mandelbrot":
        return iterate_complex(c, max_iter)
    if spec.family == "quaternionic":
        return iterate_quaternionic(c, max_iter)
    if spec.family == "spherical":
        return iterate_spherical(c, max_iter)
    if spec.family == "spherical_power":
        return iterate_spherical_power(c, spec.m, max_iter)
    return iterate_spherical_ab(c, spec.a, spec.b, max_iter)


def orbit_norms(spec: EngineSpec, c, steps: int) -> list[float]:
    """Norms of the first ``steps`` iterates, ignoring the escape radius.

    Stops early if the orbit overflows the float range.
    """
    if spec.family == "complex_mandelbrot":
        z, step, norm = 0j, (lambda z: z * z), abs
    elif spec.family == "quaternionic":
        z, step, norm = Quaternion(0.0), (lambda q: qmul(q, q)), qnorm
    else:
        z, norm = PureQuaternion(0.0, 0.0, 0.0), PureQuaternion.norm
        if spec.family == "spherical_ab":
            step = lambda q: spherical.sprod_ab(q, spec.a, spec.b)  # noqa: E731
        else:
            m = 2 if spec.family == "spherical" else spec.m
            step = lambda q: spherical.spow(q, m)  # noqa: E731
    out = []
    for _ in range(steps):
        try:
            z = step(z) + c
        except OverflowError:
            break
        r = norm(z)
        if not math.isfinite(r):
            break
        out.append(r)
    return out


# -- array kernels ------------------------------------------------------------

@dataclass
class EscapeArrays:
    """Per-orbit results of :func:`escape_arrays`, one entry per sample."""

    iterations: np.ndarray
    escaped: np.ndarray
    final_norm: np.ndarray
    margin: np.ndarray
    peak: np.ndarray  # largest iterate norm seen

    def __len__(self):
        return len(self.iterations)

    def result(self, idx: int) -> EscapeResult:
        return EscapeResult(bool(self.escaped[idx]), int(self.iterations[idx]),
                            float(self.final_norm[idx]), float(self.margin[idx]))


def parameters_from_points(spec: EngineSpec, points: np.ndarray) -> np.ndarray:
    """Embed ``(N, 3)`` sample points as ``(N, 4)`` components ``(w, x, y, z)``.

    Complex parameters use ``w`` and ``x``; pure ones ``x``, ``y``, ``z``.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    comps = np.zeros((len(points), 4))
    if spec.family == "complex_mandelbrot":
        comps[:, 0] = points[:, 0]
        comps[:, 1] = points[:, 1]
    elif spec.family == "quaternionic":
        for col, unit in enumerate(spec.slice_units):
            comps[:, "1ijk".index(unit)] = points[:, col]
    else:
        comps[:, 1:] = points
    return comps


def escape_arrays(spec: EngineSpec, params: np.ndarray, max_iter: int) -> EscapeArrays:
    """Iterate every row of ``params`` (``(N, 4)`` as ``w, x, y, z``).

    Orbits are advanced together; escaped ones are dropped from the working
    set.  Each orbit's arithmetic is elementwise, so the result for a sample
    does not depend on the other samples in the batch.
    """
    _check_max_iter(max_iter)
    params = np.asarray(params, dtype=np.float64).reshape(-1, 4)
    n = len(params)
    radius = escape_radius(spec)
    iterations = np.full(n, max_iter, dtype=np.int64)
    escaped = np.zeros(n, dtype=bool)
    final = np.zeros(n)
    margin = np.full(n, np.inf)
    peak = np.zeros(n)

    active = np.arange(n)
    if spec.family == "complex_mandelbrot":
        c = params[:, 0] + 1j * params[:, 1]
        state = [np.zeros(n, dtype=np.complex128)]
        consts = [c]

        def advance(st, cs):
            (z,), (cc,) = st, cs
            z = z * z + cc
            return [z], np.abs(z)
    elif spec.family == "quaternionic":
        state = [np.zeros(n) for _ in range(4)]
        consts = [params[:, k].copy() for k in range(4)]

        def advance(st, cs):
            a, b, c_, d = st
            w = a * a - b * b - c_ * c_ - d * d + cs[0]
            x = a * b + b * a + c_ * d - d * c_ + cs[1]
            y = a * c_ + c_ * a + d * b - b * d + cs[2]
            z = a * d + d * a + b * c_ - c_ * b + cs[3]
            return [w, x, y, z], np.sqrt(w * w + x * x + y * y + z * z)
    else:
        state = [np.zeros(n) for _ in range(3)]
        consts = [params[:, k].copy() for k in range(1, 4)]
        if spec.family == "spherical_ab":
            a_mul, b_mul = spec.a, spec.b

            def square(x, y, z):
                return spherical.sprod_ab_arrays(x, y, z, a_mul, b_mul)
        else:
            power = 2 if spec.family == "spherical" else spec.m

            def square(x, y, z):
                return spherical.spow_arrays(x, y, z, power)

        def advance(st, cs):
            x, y, z = square(*st)
            x = x + cs[0]
            y = y + cs[1]
            z = z + cs[2]
            return [x, y, z], np.sqrt(x * x + y * y + z * z)

    for it in range(1, max_iter + 1):
        if active.size == 0:
            break
        state, r = advance(state, consts)
        margin[active] = np.minimum(margin[active], np.abs(r - radius))
        peak[active] = np.maximum(peak[active], r)
        out = r > radius
        if out.any():
            gone = active[out]
            iterations[gone] = it
            escaped[gone] = True
            final[gone] = r[out]
            keep = ~out
            active = active[keep]
            state = [s[keep] for s in state]
            consts = [s[keep] for s in consts]
            r = r[keep]
        if it == max_iter:
            final[active] = r
    return EscapeArrays(iterations, escaped, final, margin, peak)


def escape_points(spec: EngineSpec, points: np.ndarray, max_iter: int) -> EscapeArrays:
    """:func:`escape_arrays` over ``(N, 3)`` sample points."""
    return escape_arrays(spec, parameters_from_points(spec, points), max_iter)
