"""Grid sampling of the engines and file output.

Samples sit at cell centres.  In a 2D slice, column 0 is the minimum ``u``
and row 0 the maximum ``v`` (image orientation).  Volumes are ordered
x-fastest with every axis ascending.

Points are split into fixed-size blocks before any work is handed to
threads, so the block contents, and therefore every cell value, are the same
for any worker count.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .dynamics import EngineSpec, EscapeArrays, escape_points

BLOCK = 4096
RAW_MAX = 65535
THREADS_ENV = "SPHEREBROT_THREADS"

# "octet": 8-colour cycle indexed by escape iteration mod 8; members are black
PALETTE = (
    (0x1f, 0x3b, 0x73),
    (0x2e, 0x86, 0xab),
    (0x5c, 0xc8, 0xc8),
    (0xa8, 0xe0, 0x63),
    (0xf6, 0xd1, 0x3a),
    (0xf2, 0x8c, 0x28),
    (0xd6, 0x4a, 0x3b),
    (0x8e, 0x2c, 0x6e),
)
MEMBER_COLOR = (0, 0, 0)

PLANES = ("x", "y", "z")


def default_workers() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class SliceSpec:
    engine: EngineSpec
    plane: str = "z"
    offset: float = 0.0
    center: tuple[float, float] = (0.0, 0.0)
    extent: tuple[float, float] = (2.0, 2.0)
    resolution: tuple[int, int] = (256, 256)
    max_iter: int = 100

    def __post_init__(self):
        if self.plane not in PLANES:
            raise ValueError(f"plane must be one of x, y, z; got {self.plane!r}")
        w, h = self.resolution
        if w < 1 or h < 1:
            raise ValueError(f"resolution must be at least 1x1, got {w}x{h}")
        if min(self.extent) <= 0:
            raise ValueError(f"extents must be > 0, got {self.extent}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        """Column ``u`` and row ``v`` sample coordinates."""
        w, h = self.resolution
        (cu, cv), (eu, ev) = self.center, self.extent
        u = cu - eu + (np.arange(w) + 0.5) * (2.0 * eu / w)
        v = cv + ev - (np.arange(h) + 0.5) * (2.0 * ev / h)
        return u, v

    def points(self) -> np.ndarray:
        u, v = self.axes()
        uu, vv = np.meshgrid(u, v)
        oo = np.full(uu.shape, float(self.offset))
        cols = {"z": (uu, vv, oo), "y": (uu, oo, vv), "x": (oo, uu, vv)}[self.plane]
        return np.stack([c.ravel() for c in cols], axis=1)


@dataclass(frozen=True)
class VolumeSpec:
    engine: EngineSpec
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)
    extent: tuple[float, float, float] = (2.0, 2.0, 2.0)
    resolution: tuple[int, int, int] = (64, 64, 64)
    max_iter: int = 100

    def __post_init__(self):
        if min(self.resolution) < 1:
            raise ValueError(f"resolution must be at least 1 per axis, got {self.resolution}")
        if min(self.extent) <= 0:
            raise ValueError(f"extents must be > 0, got {self.extent}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")

    def axes(self) -> list[np.ndarray]:
        return [c - e + (np.arange(n) + 0.5) * (2.0 * e / n)
                for c, e, n in zip(self.center, self.extent, self.resolution)]

    def points(self) -> np.ndarray:
        xs, ys, zs = self.axes()
        zz, yy, xx = np.meshgrid(zs, ys, xs, indexing="ij")
        return np.stack([xx.ravel(), yy.ravel(), zz.ravel()], axis=1)

    def voxel_diagonal(self) -> float:
        return math.sqrt(sum((2.0 * e / n) ** 2
                             for e, n in zip(self.extent, self.resolution)))


def _engine_meta(engine: EngineSpec) -> dict:
    meta = {"engine": engine.family}
    if engine.family == "spherical_power":
        meta["m"] = engine.m
    elif engine.family == "spherical_ab":
        meta["a"] = engine.a
        meta["b"] = engine.b
    elif engine.family == "quaternionic":
        meta["units"] = ",".join(engine.slice_units)
    return meta


def _fmt(values) -> str:
    return ",".join(repr(float(v)) for v in values)


@dataclass
class EscapeGrid:
    width: int
    height: int
    max_iter: int
    cells: np.ndarray  # (height, width), row-major
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.cells = np.asarray(self.cells).reshape(self.height, self.width)

    @property
    def members(self) -> np.ndarray:
        return self.cells == self.max_iter


@dataclass
class EscapeVolume:
    width: int
    height: int
    depth: int
    max_iter: int
    cells: np.ndarray  # (depth, height, width), x fastest
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.cells = np.asarray(self.cells).reshape(self.depth, self.height, self.width)

    @property
    def members(self) -> np.ndarray:
        return self.cells == self.max_iter


def evaluate_blocks(engine: EngineSpec, points: np.ndarray, max_iter: int,
                    workers: int | None = None) -> EscapeArrays:
    """:func:`escape_points` over ``points``, computed in fixed blocks."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    workers = default_workers() if workers is None else max(1, int(workers))
    blocks = [points[i:i + BLOCK] for i in range(0, len(points), BLOCK)]
    if not blocks:
        return escape_points(engine, points, max_iter)

    def run(block):
        return escape_points(engine, block, max_iter)

    if workers == 1 or len(blocks) == 1:
        parts = [run(b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, blocks))
    return EscapeArrays(*(np.concatenate([getattr(p, f) for p in parts])
                          for f in ("iterations", "escaped", "final_norm", "margin", "peak")))


def evaluate_points(engine: EngineSpec, points: np.ndarray, max_iter: int,
                    workers: int | None = None) -> np.ndarray:
    """Escape iteration per point (``max_iter`` for members)."""
    return evaluate_blocks(engine, points, max_iter, workers).iterations


def render_slice(spec: SliceSpec, workers: int | None = None) -> EscapeGrid:
    w, h = spec.resolution
    cells = evaluate_points(spec.engine, spec.points(), spec.max_iter, workers)
    meta = _engine_meta(spec.engine)
    meta.update(plane=f"{spec.plane}={spec.offset!r}", center=_fmt(spec.center),
                extent=_fmt(spec.extent), width=w, height=h, max_iter=spec.max_iter)
    return EscapeGrid(w, h, spec.max_iter, cells, meta)


def render_volume(spec: VolumeSpec, workers: int | None = None) -> EscapeVolume:
    w, h, d = spec.resolution
    cells = evaluate_points(spec.engine, spec.points(), spec.max_iter, workers)
    meta = _engine_meta(spec.engine)
    meta.update(center=_fmt(spec.center), extent=_fmt(spec.extent),
                width=w, height=h, depth=d, max_iter=spec.max_iter)
    return EscapeVolume(w, h, d, spec.max_iter, cells, meta)


def metadata_line(meta: dict) -> str:
    return " ".join(f"{k}={v}" for k, v in meta.items())


# -- writers --------------------------------------------------------------------

def pgm_bytes(grid: EscapeGrid) -> bytes:
    values = (255 * grid.cells.astype(np.int64)) // grid.max_iter
    header = f"P5\n{grid.width} {grid.height}\n255\n".encode("ascii")
    return header + values.astype(np.uint8).tobytes()


def write_pgm(grid: EscapeGrid, path) -> None:
    Path(path).write_bytes(pgm_bytes(grid))


def ppm_bytes(grid: EscapeGrid, palette: Sequence[tuple[int, int, int]] = PALETTE) -> bytes:
    lut = np.asarray(palette, dtype=np.uint8)
    rgb = lut[grid.cells.astype(np.int64) % len(lut)]
    rgb[grid.members] = MEMBER_COLOR
    header = f"P6\n{grid.width} {grid.height}\n255\n".encode("ascii")
    return header + rgb.tobytes()


def write_ppm(grid: EscapeGrid, path, palette=PALETTE) -> None:
    Path(path).write_bytes(ppm_bytes(grid, palette))


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".txt")


def write_raw(volume: EscapeVolume | EscapeGrid, path) -> Path:
    """Little-endian uint16 counts, x fastest, plus a ``key=value`` sidecar.

    Returns the sidecar path.
    """
    if volume.max_iter > RAW_MAX:
        raise ValueError(f"max_iter {volume.max_iter} does not fit in 16 bits (max {RAW_MAX})")
    depth = getattr(volume, "depth", 1)
    Path(path).write_bytes(volume.cells.astype("<u2").tobytes())
    meta = dict(volume.meta)
    meta.update(width=volume.width, height=volume.height, depth=depth,
                max_iter=volume.max_iter, dtype="uint16le", order="x-fastest")
    side = sidecar_path(path)
    side.write_text("".join(f"{k}={v}\n" for k, v in meta.items()), encoding="ascii")
    return side


def read_sidecar(path) -> dict:
    meta = {}
    for line in Path(path).read_text(encoding="ascii").splitlines():
        if line.strip():
            key, _, value = line.partition("=")
            meta[key] = value
    return meta


def read_raw(path) -> EscapeVolume:
    meta = read_sidecar(sidecar_path(path))
    w, h, d = (int(meta[k]) for k in ("width", "height", "depth"))
    cells = np.frombuffer(Path(path).read_bytes(), dtype="<u2")
    if cells.size != w * h * d:
        raise ValueError(f"{path}: expected {w * h * d} cells, found {cells.size}")
    return EscapeVolume(w, h, d, int(meta["max_iter"]), cells.astype(np.int64), meta)


def write_csv(records: Sequence[NamedTuple], path, header: Sequence[str] | None = None) -> None:
    if header is None:
        if not records:
            raise ValueError("cannot infer a CSV header from no records")
        header = records[0]._fields
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(records)


class GridSample(NamedTuple):
    col: int
    row: int
    u: float
    v: float
    iterations: int


def grid_records(grid: EscapeGrid, spec: SliceSpec) -> list[GridSample]:
    u, v = spec.axes()
    return [GridSample(i, j, float(u[i]), float(v[j]), int(grid.cells[j, i]))
            for j in range(grid.height) for i in range(grid.width)]


# -- radial scans -----------------------------------------------------------------

class ProfileSample(NamedTuple):
    radius: float
    iterations: int
    member: bool


def radial_profile(engine: EngineSpec, direction, r_max: float, samples: int,
                   max_iter: int, workers: int | None = None) -> list[ProfileSample]:
    """Escape iterations along ``r * direction / |direction|`` for ``r`` in [0, r_max].

    ``direction`` is given in the engine's sample space, which for the
    ``(i, j, k)`` quaternionic slice and the spherical families is the pure
    quaternion itself.
    """
    d = np.asarray(tuple(direction), dtype=np.float64)
    norm = float(np.sqrt(np.sum(d * d)))
    if d.shape != (3,) or norm == 0.0 or not math.isfinite(norm):
        raise ValueError("direction must be a finite nonzero 3-vector")
    if samples < 2:
        raise ValueError(f"samples must be >= 2, got {samples}")
    if not r_max > 0:
        raise ValueError(f"r_max must be > 0, got {r_max}")
    radii = r_max * np.arange(samples) / (samples - 1)
    unit = d / norm
    res = evaluate_blocks(engine, radii[:, None] * unit, max_iter, workers)
    return [ProfileSample(float(r), int(n), not bool(e))
            for r, n, e in zip(radii, res.iterations, res.escaped)]


def member_runs(flags: Sequence[bool]) -> list[tuple[int, int]]:
    """Maximal ``[start, stop)`` index ranges of consecutive true flags."""
    runs, start = [], None
    for idx, flag in enumerate(flags):
        if flag and start is None:
            start = idx
        elif not flag and start is not None:
            runs.append((start, idx))
            start = None
    if start is not None:
        runs.append((start, len(flags)))
    return runs
