"""Numerical checks of the algebraic and dynamical results.

Each ``check_*`` function returns a :class:`CheckReport`.  Random operands
come from ``numpy.random.default_rng(seed)`` (PCG64) and, unless stated
otherwise, are drawn uniformly from the cube [-2.2, 2.2]^3, which covers
both member and escape regimes of every family.

Equivalence checks compare escape *iterations*.  A disagreement is excused
only when one of the two orbits came within ``band`` of the escape radius
(its ``margin``), and at most ``budget`` of the samples may disagree.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import dynamics, spherical
from .dynamics import EngineSpec, escape_points, iterate_complex, orbit_norms
from .quaternion import K, PureQuaternion, Quaternion, qmul
from .raster import member_runs, radial_profile

CUBE = 2.2
BAND = 1e-6
BUDGET = 0.005


@dataclass(frozen=True)
class CheckReport:
    check_id: str
    passed: bool
    trials: int
    worst_error: float
    details: str = ""

    def as_text(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return (f"{flag} {self.check_id} trials={self.trials} "
                f"worst_error={self.worst_error:.3e} {self.details}").rstrip()

    def as_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


@dataclass(frozen=True)
class AxisExtent:
    """Largest ``x`` with ``x i`` in the Mandelbrot set at finite depth."""

    R: float
    max_iter: int
    resolution: float


def _need_trials(trials: int) -> None:
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")


def random_pure(rng: np.random.Generator, n: int, half_width: float = CUBE) -> np.ndarray:
    return rng.uniform(-half_width, half_width, size=(n, 3))


def _pq(row) -> PureQuaternion:
    return PureQuaternion(float(row[0]), float(row[1]), float(row[2]))


def _diff(p: PureQuaternion, q: PureQuaternion) -> float:
    return max(abs(p.x - q.x), abs(p.y - q.y), abs(p.z - q.z))


def _rel(err: float, scale: float) -> float:
    return err / scale if scale > 0.0 else err


# -- algebra ----------------------------------------------------------------------

def check_magma_laws(trials: int = 10_000, seed=1, pairs=None, tol: float = 1e-12) -> CheckReport:
    """Closure, commutativity and identity ``k`` for the spherical product."""
    if pairs is None:
        _need_trials(trials)
        rng = np.random.default_rng(seed)
        pts = random_pure(rng, 2 * trials)
        pairs = [(_pq(pts[2 * t]), _pq(pts[2 * t + 1])) for t in range(trials)]
    elif not pairs:
        raise ValueError("pairs must not be empty")
    worst = 0.0
    closure_failures = 0
    for q1, q2 in pairs:
        p12 = spherical.sprod(q1, q2)
        p21 = spherical.sprod(q2, q1)
        if not (isinstance(p12, PureQuaternion) and p12.is_finite()):
            closure_failures += 1
            continue
        scale = q1.norm() * q2.norm()
        worst = max(worst, _rel(_diff(p12, p21), scale))
        for q in (q1, q2):
            e = K.vector
            worst = max(worst, _rel(_diff(spherical.sprod(q, e), q), q.norm()),
                        _rel(_diff(spherical.sprod(e, q), q), q.norm()))
    passed = closure_failures == 0 and worst <= tol
    return CheckReport("magma", passed, len(pairs), worst,
                       f"closure_failures={closure_failures} tol={tol:g}")


def check_inverses(trials: int = 1000, seed=1, tol: float = 1e-12) -> CheckReport:
    """Axis points ``c k`` invert to ``k / c``; off-axis points have no inverse."""
    _need_trials(trials)
    rng = np.random.default_rng(seed)
    worst = 0.0
    wrong = 0
    for c in rng.uniform(-CUBE, CUBE, size=trials):
        if c == 0.0:
            continue
        inv = spherical.spherical_inverse(PureQuaternion(0.0, 0.0, float(c)))
        if inv is None:
            wrong += 1
            continue
        worst = max(worst, _diff(inv, PureQuaternion(0.0, 0.0, 1.0 / c)) * abs(c),
                    _diff(spherical.sprod(PureQuaternion(0.0, 0.0, float(c)), inv), K.vector))
    off_axis = random_pure(rng, trials)
    for row in off_axis:
        if spherical.spherical_inverse(_pq(row)) is not None:
            wrong += 1
    for q in (PureQuaternion(0.0, 0.0, 0.0), PureQuaternion(1.0, 0.0, 0.0)):
        if spherical.spherical_inverse(q) is not None:
            wrong += 1
    return CheckReport("inverses", wrong == 0 and worst <= tol, 2 * trials, worst,
                       f"wrong_verdicts={wrong}")


def check_nonassociativity(tol: float = 1e-12) -> CheckReport:
    h = math.sqrt(2.0) / 2.0
    q1 = PureQuaternion(0.0, h, -h)
    q2 = PureQuaternion(0.0, 1.0, 0.0)
    sprod = spherical.sprod
    left = sprod(q2, sprod(q1, q1))
    right = sprod(sprod(q2, q1), q1)
    err_left = _diff(left, PureQuaternion(0.0, 0.0, -1.0))
    err_right = _diff(right, PureQuaternion(0.0, -1.0, 0.0))
    worst = max(err_left, err_right)
    return CheckReport("nonassociativity", worst <= tol, 1, worst,
                       f"q2(q1q1)={tuple(left)} (q2q1)q1={tuple(right)}")


def check_norm_laws(trials: int = 10_000, seed=1, max_power: int = 8,
                    tol: float = 1e-12) -> CheckReport:
    """Norms of ``sprod``, ``spow`` and ``sprod_ab``; ``spow(q, 2) == sprod(q, q)``."""
    _need_trials(trials)
    rng = np.random.default_rng(seed)
    pts = random_pure(rng, 2 * trials)
    ab = rng.uniform(-4.0, 4.0, size=(trials, 2))
    worst = 0.0
    for t in range(trials):
        q1, q2 = _pq(pts[2 * t]), _pq(pts[2 * t + 1])
        n1, n2 = q1.norm(), q2.norm()
        worst = max(worst, _rel(abs(spherical.sprod(q1, q2).norm() - n1 * n2), n1 * n2))
        for n in range(max_power + 1):
            target = n1 ** n
            worst = max(worst, _rel(abs(spherical.spow(q1, n).norm() - target), target))
        a, b = ab[t]
        worst = max(worst, _rel(abs(spherical.sprod_ab(q1, a, b).norm() - n1 * n1), n1 * n1))
        worst = max(worst, _rel(_diff(spherical.spow(q1, 2), spherical.sprod(q1, q1)), n1 * n1))
    return CheckReport("norm-laws", worst <= tol, trials, worst, f"powers<= {max_power}")


def check_rotation_identity(trials: int = 10_000, seed=1, tol: float = 1e-10) -> CheckReport:
    """``sprod_ab(q, 1, 2)`` against ``rho (cos t/2 + k sin t/2) q (cos t/2 - k sin t/2)``."""
    _need_trials(trials)
    rng = np.random.default_rng(seed)
    pts = random_pure(rng, trials)
    # every fifth sample is pushed onto the k axis, one of them to the origin
    pts[::5, :2] = 0.0
    pts[0] = 0.0
    worst = 0.0
    for row in pts:
        q = _pq(row)
        s = spherical.to_spherical(q)
        half = s.theta / 2.0
        left = Quaternion(math.cos(half), 0.0, 0.0, math.sin(half))
        right = Quaternion(math.cos(half), 0.0, 0.0, -math.sin(half))
        rhs = qmul(qmul(left, q.as_quaternion()), right) * s.rho
        lhs = spherical.sprod_ab(q, 1.0, 2.0)
        err = max(abs(rhs.w), _diff(lhs, rhs.vector))
        worst = max(worst, _rel(err, s.rho * s.rho))
    return CheckReport("rotation-identity", worst <= tol, trials, worst, f"tol={tol:g}")


# -- dynamics ---------------------------------------------------------------------

def _power_engine(m: int) -> EngineSpec:
    return EngineSpec("spherical") if m == 2 else EngineSpec("spherical_power", m=m)


def check_escape_radius(trials: int = 10_000, seed=1, max_iter: int = 512,
                        powers=(2, 3, 8), tol: float = 1e-9,
                        continuation: int = 200) -> CheckReport:
    """Escape radius ``2^(1/(m-1))`` is an iff bound.

    Parameters outside the radius escape at the first iterate, member orbits
    never leave the closed ball, and once an orbit with ``|c|`` inside the
    radius leaves it by ``delta``, ``k`` further steps put it at least
    ``(2m)^k delta`` beyond the radius.
    """
    _need_trials(trials)
    rng = np.random.default_rng(seed)
    worst = 0.0
    failures = []
    n_members = n_continued = 0
    for m in powers:
        spec = _power_engine(m)
        radius = spec.radius
        pts = random_pure(rng, trials)
        # shell just outside the radius
        shell = rng.normal(size=(trials // 10 + 1, 3))
        shell /= np.linalg.norm(shell, axis=1)[:, None]
        shell *= radius * (1.0 + rng.uniform(1e-9, 0.05, size=(len(shell), 1)))
        pts = np.vstack([pts, shell])
        res = escape_points(spec, pts, max_iter)
        norms = np.sqrt(np.sum(pts * pts, axis=1))
        outside = norms > radius
        bad_first = np.count_nonzero(outside & ~(res.escaped & (res.iterations == 1)))
        if bad_first:
            failures.append(f"m={m}:{bad_first} outside points not escaping at 1")
        members = ~res.escaped
        n_members += int(np.count_nonzero(members))
        if members.any():
            excess = float(np.max(res.peak[members] - radius))
            worst = max(worst, excess)
            if excess > tol:
                failures.append(f"m={m}: member orbit exceeds radius by {excess:g}")
        inside_escapers = np.flatnonzero(res.escaped & ~outside)[:continuation]
        for idx in inside_escapers:
            c = _pq(pts[idx])
            orbit = orbit_norms(spec, c, int(res.iterations[idx]) + 3)
            first = next((n for n, r in enumerate(orbit) if r > radius), None)
            if first is None:
                continue
            delta = orbit[first] - radius
            n_continued += 1
            for k in range(1, 4):
                if first + k >= len(orbit):
                    break
                bound = radius + (2 * m) ** k * delta
                shortfall = (bound - orbit[first + k]) / bound
                worst = max(worst, shortfall)
                if shortfall > tol:
                    failures.append(f"m={m}: divergence bound missed at k={k}")
    details = "; ".join(failures[:5]) or (f"powers={tuple(powers)} max_iter={max_iter} "
                                          f"members={n_members} continued={n_continued}")
    return CheckReport("escape-radius", not failures, trials * len(powers),
                       max(worst, 0.0), details)


def check_growth_lemmas(trials: int = 100, seed=1, steps: int = 10, powers=(2, 3, 8),
                        tol: float = 1e-9) -> CheckReport:
    """``|Q^n(0)| >= |c| (|c|^(m-1) - 1)^(n-1)`` for ``|c|`` in (R, R + 1]."""
    _need_trials(trials)
    rng = np.random.default_rng(seed)
    worst = -math.inf
    checked = 0
    for m in powers:
        spec = _power_engine(m)
        radius = spec.radius
        dirs = rng.normal(size=(trials, 3))
        dirs /= np.linalg.norm(dirs, axis=1)[:, None]
        radii = radius + (1.0 - rng.uniform(size=trials))
        for d, r in zip(dirs, radii):
            c = _pq(d * r)
            cn = c.norm()
            if cn <= radius:
                continue
            growth = cn ** (m - 1) - 1.0
            # an overflowing orbit has certainly passed every bound checked here
            for n, value in enumerate(orbit_norms(spec, c, steps), start=1):
                bound = cn * growth ** (n - 1)
                worst = max(worst, (bound - value) / bound)
                checked += 1
    return CheckReport("growth-lemmas", checked > 0 and worst <= tol, trials * len(powers),
                       max(worst, 0.0), f"powers={tuple(powers)} steps={steps} bounds={checked}")


def _compare(check_id: str, a, b, band: float, budget: float, note: str = "") -> CheckReport:
    n = len(a)
    differ = a.iterations != b.iterations
    ndiff = int(np.count_nonzero(differ))
    closest = np.minimum(a.margin, b.margin)[differ]
    unexcused = int(np.count_nonzero(closest > band))
    frac = ndiff / n if n else 0.0
    passed = frac <= budget and unexcused == 0
    return CheckReport(check_id, passed, n, frac,
                       f"disagreements={ndiff} outside_band={unexcused} {note}".rstrip())


def _grid(n: int, half: float = 2.0) -> np.ndarray:
    return -half + (np.arange(n) + 0.5) * (2.0 * half / n)


def check_bulbic_equivalence(grid: int = 256, max_iter: int = 64, band: float = BAND,
                             budget: float = BUDGET) -> CheckReport:
    """z = 0 plane of the (1, 2) set against the complex Mandelbrot set."""
    if grid < 16:
        raise ValueError(f"grid must be >= 16, got {grid}")
    t = _grid(grid)
    u, v = (g.ravel() for g in np.meshgrid(t, t))
    pts = np.stack([u, v, np.zeros_like(u)], axis=1)
    bulbic = escape_points(EngineSpec("spherical_ab", a=1.0, b=2.0), pts, max_iter)
    plane = escape_points(EngineSpec("complex_mandelbrot"), pts, max_iter)
    return _compare("bulbic", bulbic, plane, band, budget, f"grid={grid} max_iter={max_iter}")


def check_21_slice_equivalence(grid: int = 64, max_iter: int = 64, band: float = BAND,
                               budget: float = BUDGET) -> CheckReport:
    """``a k + b i + c j`` under the (2, 1) product against ``a + b i + c j``.

    Samples cover the planes c = 0 and b = 0 of the (a, b, c) cube [-2, 2]^3.
    """
    if grid < 16:
        raise ValueError(f"grid must be >= 16, got {grid}")
    t = _grid(grid)
    s, r = (g.ravel() for g in np.meshgrid(t, t))
    zero = np.zeros_like(s)
    abc = np.vstack([np.stack([s, r, zero], axis=1), np.stack([s, zero, r], axis=1)])
    params_sph = np.zeros((len(abc), 4))
    params_sph[:, 1] = abc[:, 1]  # i
    params_sph[:, 2] = abc[:, 2]  # j
    params_sph[:, 3] = abc[:, 0]  # k
    params_quat = np.zeros((len(abc), 4))
    params_quat[:, :3] = abc
    sph = dynamics.escape_arrays(EngineSpec("spherical_ab", a=2.0, b=1.0), params_sph, max_iter)
    quat = dynamics.escape_arrays(EngineSpec("quaternionic"), params_quat, max_iter)
    return _compare("slice-21", sph, quat, band, budget, f"grid={grid} max_iter={max_iter}")


SLICES = (("1", "i", "j"), ("1", "i", "k"), ("1", "j", "k"))


def check_slice_rotation(trials: int = 10_000, seed=1, max_iter: int = 256,
                         band: float = BAND, budget: float = BUDGET) -> CheckReport:
    """Slices through 1 reduce to ``q0 + i sqrt(q1^2 + q2^2)`` in the complex plane."""
    _need_trials(trials)
    rng = np.random.default_rng(seed)
    pts = random_pure(rng, trials)
    pts[0] = (0.0, 0.0, 0.0)
    pts[1] = (-1.0, 0.1, 0.1)
    reduced = np.stack([pts[:, 0], np.hypot(pts[:, 1], pts[:, 2]), np.zeros(trials)], axis=1)
    plane = escape_points(EngineSpec("complex_mandelbrot"), reduced, max_iter)
    reports = [_compare("slice-rotation", escape_points(EngineSpec("quaternionic", slice_units=u),
                                                        pts, max_iter), plane, band, budget)
               for u in SLICES]
    worst = max(r.worst_error for r in reports)
    details = " | ".join(f"{''.join(u)}: {r.details}" for u, r in zip(SLICES, reports))
    return CheckReport("slice-rotation", all(r.passed for r in reports), trials * len(SLICES),
                       worst, details)


def compute_axis_extent(max_iter: int = 1000, resolution: float = 1e-4) -> AxisExtent:
    """Scan ``x i`` for x in [0, 2], then bisect past the largest member.

    Finite depth over-counts members, so the result approximates R from above.
    """
    if not resolution > 0:
        raise ValueError(f"resolution must be > 0, got {resolution}")
    n = max(2, math.ceil(2.0 / resolution))
    n += n % 2  # keep x = 1 on the grid
    xs = 2.0 * np.arange(n + 1) / n
    pts = np.stack([np.zeros_like(xs), xs, np.zeros_like(xs)], axis=1)
    res = escape_points(EngineSpec("complex_mandelbrot"), pts, max_iter)
    members = np.flatnonzero(~res.escaped)
    top = int(members[-1])
    if top == n:
        return AxisExtent(2.0, max_iter, resolution)
    lo, hi = float(xs[top]), float(xs[top + 1])
    while hi - lo > resolution / 1024:
        mid = 0.5 * (lo + hi)
        if iterate_complex(complex(0.0, mid), max_iter).escaped:
            hi = mid
        else:
            lo = mid
    return AxisExtent(lo, max_iter, resolution)


def check_axis_extent(max_iter: int = 1000, resolution: float = 1e-4) -> CheckReport:
    """R is bracketed by the member ``i`` and the escaping ``1.5 i``."""
    ext = compute_axis_extent(max_iter, resolution)
    at_one = not iterate_complex(1j, max_iter).escaped
    at_three_halves = iterate_complex(1.5j, max_iter).escaped
    passed = at_one and at_three_halves and 1.0 <= ext.R < 1.5 and ext.R <= 2.0
    return CheckReport("axis-extent", passed, 1, ext.R - 1.0,
                       f"R={ext.R!r} max_iter={max_iter} resolution={resolution:g}")


METASPHERE_DIRECTIONS = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (1.0, 1.0, 1.0))


def check_metasphere_gaps(max_iter: int = 1000, samples: int = 10_000,
                          r_max: float = 2.0) -> CheckReport:
    """Radial membership in the (i, j, k) slice: direction-free and gapped."""
    if samples < 100:
        raise ValueError(f"samples must be >= 100, got {samples}")
    engine = EngineSpec("quaternionic", slice_units=("i", "j", "k"))
    profiles = [radial_profile(engine, d, r_max, samples, max_iter)
                for d in METASPHERE_DIRECTIONS]
    flags = [[s.member for s in p] for p in profiles]
    mismatches = max(sum(a != b for a, b in zip(flags[0], f)) for f in flags[1:])
    runs = member_runs(flags[0])
    beyond = sum(s.member for s in profiles[0] if s.radius > 2.0)
    passed = (mismatches == 0 and len(runs) >= 2 and flags[0][0] and beyond == 0)
    return CheckReport("metasphere", passed, samples * len(profiles), float(mismatches),
                       f"member_runs={len(runs)} first_gap_at_r="
                       f"{profiles[0][runs[0][1]].radius if runs else float('nan'):.6f}")


# -- driver -----------------------------------------------------------------------

def _registry(seed):
    return {
        "magma": lambda: check_magma_laws(10_000, seed),
        "inverses": lambda: check_inverses(1000, seed),
        "nonassociativity": check_nonassociativity,
        "norm-laws": lambda: check_norm_laws(10_000, seed),
        "rotation-identity": lambda: check_rotation_identity(10_000, seed),
        "escape-radius": lambda: check_escape_radius(10_000, seed),
        "growth-lemmas": lambda: check_growth_lemmas(100, seed),
        "bulbic": check_bulbic_equivalence,
        "slice-21": check_21_slice_equivalence,
        "slice-rotation": lambda: check_slice_rotation(10_000, seed),
        "axis-extent": check_axis_extent,
        "metasphere": check_metasphere_gaps,
    }


CHECK_IDS = tuple(_registry(0))


def run_check(check_id: str, seed=1) -> CheckReport:
    registry = _registry(seed)
    if check_id not in registry:
        raise KeyError(f"unknown check {check_id!r}; valid: {', '.join(CHECK_IDS)}")
    return registry[check_id]()


def run_all(seed=1) -> list[CheckReport]:
    """Every check at its default parameters, in :data:`CHECK_IDS` order."""
    return [fn() for fn in _registry(seed).values()]
