"""Command-line front end: ``render2d``, ``render3d``, ``profile``, ``verify``.

Exit codes: 0 success, 1 runtime error or failed check, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import raster, verify
from .dynamics import EngineSpec, escape_radius

ENGINES = {
    "complex": "complex_mandelbrot",
    "quat": "quaternionic",
    "quat-slice": "quaternionic",
    "spherical": "spherical",
    "spherical-m": "spherical_power",
    "spherical-ab": "spherical_ab",
}
FORMATS = ("pgm", "ppm", "csv", "raw")


class UsageError(Exception):
    pass


def _floats(text: str, count: int, flag: str) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"{flag} expects {count} comma-separated numbers, got {text!r}")
    if len(values) != count:
        raise UsageError(f"{flag} expects {count} comma-separated numbers, got {text!r}")
    return values


def _resolution(text: str, dims: int, flag: str = "--res") -> tuple[int, ...]:
    parts = text.lower().split("x")
    if len(parts) == 1:
        parts = parts * dims
    try:
        values = tuple(int(p) for p in parts)
    except ValueError:
        values = ()
    if len(values) != dims or min(values) < 1:
        shape = "x".join(["N"] * dims)
        raise UsageError(f"{flag} expects N or {shape} with every N >= 1, got {text!r}")
    return values


def _engine(args) -> EngineSpec:
    family = ENGINES[args.engine]
    if family == "spherical_power" and args.m < 2:
        raise UsageError(f"--m must be an integer >= 2 for spherical-m, got {args.m}")
    units = tuple(u.strip() for u in args.units.split(","))
    if family == "quaternionic":
        if len(units) != 3 or len(set(units)) != 3 or not set(units) <= {"1", "i", "j", "k"}:
            raise UsageError(f"--units expects three distinct units from 1,i,j,k, got {args.units!r}")
    else:
        units = ("1", "i", "j")
    return EngineSpec(family, m=args.m, a=args.a, b=args.b, slice_units=units)


def _max_iter(args, upper: int | None = None) -> int:
    if args.max_iter < 1 or (upper is not None and args.max_iter > upper):
        bound = f"between 1 and {upper}" if upper else ">= 1"
        raise UsageError(f"--max-iter must be {bound}, got {args.max_iter}")
    return args.max_iter


def _extent(text: str | None, count: int, radius: float) -> tuple[float, ...]:
    if text is None:
        return (radius,) * count
    values = _floats(text, count, "--extent")
    if min(values) <= 0:
        raise UsageError(f"--extent values must be > 0, got {text!r}")
    return values


def cmd_render2d(args) -> int:
    engine = _engine(args)
    plane, _, offset = args.plane.partition("=")
    if plane not in raster.PLANES or not offset:
        raise UsageError(f"--plane expects x=V, y=V or z=V, got {args.plane!r}")
    offset = _floats(offset, 1, "--plane")[0]
    fmt = args.format or Path(args.out).suffix.lstrip(".").lower()
    if fmt not in FORMATS:
        raise UsageError(f"--format must be one of {', '.join(FORMATS)}, got {fmt!r}")
    max_iter = _max_iter(args, raster.RAW_MAX if fmt == "raw" else None)
    spec = raster.SliceSpec(engine, plane, offset,
                            _floats(args.center, 2, "--center"),
                            _extent(args.extent, 2, escape_radius(engine)),
                            _resolution(args.res, 2), max_iter)
    grid = raster.render_slice(spec, workers=args.workers)
    if fmt == "pgm":
        raster.write_pgm(grid, args.out)
    elif fmt == "ppm":
        raster.write_ppm(grid, args.out)
    elif fmt == "csv":
        raster.write_csv(raster.grid_records(grid, spec), args.out)
    else:
        raster.write_raw(grid, args.out)
    print(raster.metadata_line(grid.meta))
    return 0


def cmd_render3d(args) -> int:
    engine = _engine(args)
    max_iter = _max_iter(args, raster.RAW_MAX)
    spec = raster.VolumeSpec(engine, _floats(args.center, 3, "--center"),
                             _extent(args.extent, 3, escape_radius(engine)),
                             _resolution(args.res, 3), max_iter)
    volume = raster.render_volume(spec, workers=args.workers)
    raster.write_raw(volume, args.out)
    print(raster.metadata_line(volume.meta))
    return 0


def cmd_profile(args) -> int:
    engine = _engine(args)
    max_iter = _max_iter(args)
    direction = _floats(args.dir, 3, "--dir")
    if not any(direction):
        raise UsageError("--dir must be a nonzero vector")
    if args.samples < 2:
        raise UsageError(f"--samples must be >= 2, got {args.samples}")
    if not args.rmax > 0:
        raise UsageError(f"--rmax must be > 0, got {args.rmax}")
    profile = raster.radial_profile(engine, direction, args.rmax, args.samples, max_iter,
                                    workers=args.workers)
    if args.out:
        raster.write_csv(profile, args.out)
    else:
        print("radius,iterations,member")
        for s in profile:
            print(f"{s.radius!r},{s.iterations},{s.member}")
    runs = raster.member_runs([s.member for s in profile])
    print(f"engine={engine.describe()} samples={args.samples} rmax={args.rmax!r} "
          f"max_iter={max_iter} member_runs={len(runs)}", file=sys.stderr)
    return 0


def cmd_verify(args) -> int:
    if args.check is not None:
        if args.check not in verify.CHECK_IDS:
            raise UsageError(f"--check must be one of {', '.join(verify.CHECK_IDS)}, "
                             f"got {args.check!r}")
        reports = [verify.run_check(args.check, args.seed)]
    elif args.suite == "all":
        reports = verify.run_all(args.seed)
    else:
        raise UsageError(f"--suite must be 'all', got {args.suite!r}")
    for r in reports:
        print(r.as_json() if args.format == "jsonl" else r.as_text())
    return 0 if all(r.passed for r in reports) else 1


def _engine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--engine", choices=sorted(ENGINES), default="spherical")
    p.add_argument("--m", type=int, default=8, help="power for spherical-m (>= 2)")
    p.add_argument("--a", type=float, default=2.0, help="phi multiplier for spherical-ab")
    p.add_argument("--b", type=float, default=2.0, help="theta multiplier for spherical-ab")
    p.add_argument("--units", default="1,i,j", help="slice units for quat engines")
    p.add_argument("--workers", type=int, default=None,
                   help=f"threads (default: ${raster.THREADS_ENV} or CPU count)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spherebrot", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("render2d", help="escape counts over a plane cut")
    _engine_flags(p)
    p.add_argument("--plane", default="z=0")
    p.add_argument("--center", default="0,0")
    p.add_argument("--extent", default=None, help="half-widths (default: escape radius)")
    p.add_argument("--res", default="256x256")
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--format", choices=FORMATS, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render2d)

    p = sub.add_parser("render3d", help="escape counts over a voxel grid (RAW + sidecar)")
    _engine_flags(p)
    p.add_argument("--center", default="0,0,0")
    p.add_argument("--extent", default=None, help="half-widths (default: escape radius)")
    p.add_argument("--res", default="64")
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render3d)

    p = sub.add_parser("profile", help="escape counts along a ray from the origin")
    _engine_flags(p)
    p.add_argument("--dir", default="1,0,0")
    p.add_argument("--rmax", type=float, default=2.0)
    p.add_argument("--samples", type=int, default=4096)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("verify", help="run the numerical checks")
    p.add_argument("--suite", default="all")
    p.add_argument("--check", default=None, help=f"one of: {', '.join(verify.CHECK_IDS)}")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--format", choices=("text", "jsonl"), default="text")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except OSError as exc:
        print(f"spherebrot: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
