import csv
import math

import numpy as np
import pytest

from spherebrot.dynamics import EngineSpec, iterate_complex
from spherebrot.raster import (
    BLOCK, MEMBER_COLOR, PALETTE, EscapeGrid, EscapeVolume, SliceSpec, VolumeSpec,
    evaluate_points, grid_records, member_runs, metadata_line, pgm_bytes, ppm_bytes,
    radial_profile, read_raw, read_sidecar, render_slice, render_volume, sidecar_path,
    write_csv, write_pgm, write_ppm, write_raw,
)

COMPLEX = EngineSpec("complex_mandelbrot")
SPHERICAL = EngineSpec("spherical")
BULB8 = EngineSpec("spherical_power", m=8)
METASPHERE = EngineSpec("quaternionic", slice_units=("i", "j", "k"))


def test_complex_three_by_three():
    spec = SliceSpec(COMPLEX, center=(-0.5, 0.0), extent=(1.5, 1.5), resolution=(3, 3), max_iter=10)
    grid = render_slice(spec, workers=1)
    # oracle: cell centres are -0.5 + {-1, 0, 1} and {1, 0, -1} (row 0 on top)
    for row, im in enumerate((1.0, 0.0, -1.0)):
        for col, re in enumerate((-1.5, -0.5, 0.5)):
            assert grid.cells[row, col] == iterate_complex(complex(re, im), 10).iterations
    assert grid.cells[1, 1] == 10
    assert grid.members[1, 1]


def test_slice_orientation():
    spec = SliceSpec(SPHERICAL, plane="y", offset=0.25, center=(1.0, -1.0), extent=(2.0, 1.0),
                     resolution=(4, 2))
    pts = spec.points().reshape(2, 4, 3)
    assert pts[0, 0].tolist() == [-0.5, 0.25, -0.5]
    assert pts[1, 3].tolist() == [2.5, 0.25, -1.5]
    x_pts = SliceSpec(SPHERICAL, plane="x", offset=3.0, resolution=(1, 1)).points()
    assert x_pts.tolist() == [[3.0, 0.0, 0.0]]


def test_max_iter_one_outside_radius():
    for engine in (COMPLEX, SPHERICAL, BULB8, METASPHERE):
        spec = SliceSpec(engine, center=(5.0, 5.0), extent=(1.0, 1.0), resolution=(7, 5), max_iter=1)
        assert np.all(render_slice(spec).cells == 1)


def test_volume_single_voxel():
    vol = render_volume(VolumeSpec(SPHERICAL, resolution=(1, 1, 1), max_iter=37))
    assert vol.cells.shape == (1, 1, 1) and vol.cells[0, 0, 0] == 37


def test_volume_outside_radius():
    vol = render_volume(VolumeSpec(SPHERICAL, center=(4, 4, 4), extent=(1, 1, 1),
                                   resolution=(2, 2, 2), max_iter=50))
    assert np.all(vol.cells == 1)


def test_volume_ordering_x_fastest():
    spec = VolumeSpec(SPHERICAL, extent=(1, 2, 3), resolution=(2, 3, 4))
    pts = spec.points()
    assert pts[:2, 0].tolist() == [-0.5, 0.5]
    assert pts[0] == pytest.approx([-0.5, -4 / 3, -2.25], abs=1e-15)
    assert pts[2] == pytest.approx([-0.5, 0.0, -2.25], abs=1e-15)
    assert pts[6, 2] == -0.75
    assert spec.voxel_diagonal() == pytest.approx(math.sqrt(1 + (4 / 3) ** 2 + 1.5 ** 2))


def test_mandelbulb_bound_small():
    spec = VolumeSpec(BULB8, extent=(1.2, 1.2, 1.2), resolution=(24, 24, 24), max_iter=30)
    vol = render_volume(spec)
    pts = spec.points().reshape(24, 24, 24, 3)[vol.members]
    assert len(pts) > 0
    assert np.linalg.norm(pts, axis=1).max() <= 2 ** (1 / 7) + spec.voxel_diagonal()


@pytest.mark.parametrize("spec", [
    SliceSpec(SPHERICAL, resolution=(97, 83), max_iter=40),
    SliceSpec(METASPHERE, plane="x", offset=0.1, resolution=(70, 70), max_iter=40),
    VolumeSpec(BULB8, extent=(1.2, 1.2, 1.2), resolution=(20, 21, 22), max_iter=20),
], ids=["slice", "metasphere-slice", "volume"])
def test_deterministic_across_workers(spec):
    render = render_slice if isinstance(spec, SliceSpec) else render_volume
    base = render(spec, workers=1)
    for workers in (2, 3, 8):
        assert np.array_equal(render(spec, workers=workers).cells, base.cells)
    assert spec.points().shape[0] > BLOCK  # several blocks are in play


def test_thread_env_does_not_change_output(monkeypatch):
    spec = SliceSpec(SPHERICAL, resolution=(90, 60), max_iter=30)
    monkeypatch.setenv("SPHEREBROT_THREADS", "1")
    one = pgm_bytes(render_slice(spec))
    monkeypatch.setenv("SPHEREBROT_THREADS", "5")
    assert pgm_bytes(render_slice(spec)) == one


def test_monotone_in_max_iter():
    pts = SliceSpec(SPHERICAL, resolution=(64, 64)).points()
    low = evaluate_points(SPHERICAL, pts, 20)
    high = evaluate_points(SPHERICAL, pts, 80)
    escaped_low = low < 20
    assert np.array_equal(high[escaped_low], low[escaped_low])
    assert np.all(high[~escaped_low] >= 20)


# -- writers ------------------------------------------------------------------------

def test_pgm_bytes():
    assert pgm_bytes(EscapeGrid(1, 1, 9, [9])) == b"P5\n1 1\n255\n\xff"
    assert pgm_bytes(EscapeGrid(1, 1, 9, [0])) == b"P5\n1 1\n255\n\x00"
    body = pgm_bytes(EscapeGrid(3, 1, 4, [1, 2, 3]))[-3:]
    assert list(body) == [63, 127, 191]


def test_ppm_bytes():
    grid = EscapeGrid(3, 1, 10, [1, 9, 10])
    data = ppm_bytes(grid)
    assert data.startswith(b"P6\n3 1\n255\n")
    body = data[len(b"P6\n3 1\n255\n"):]
    assert tuple(body[0:3]) == PALETTE[1]
    assert tuple(body[3:6]) == PALETTE[1]  # 9 mod 8
    assert tuple(body[6:9]) == MEMBER_COLOR


def test_file_writers(tmp_path):
    grid = EscapeGrid(2, 2, 5, [1, 2, 3, 5])
    write_pgm(grid, tmp_path / "a.pgm")
    write_ppm(grid, tmp_path / "a.ppm")
    assert (tmp_path / "a.pgm").read_bytes() == pgm_bytes(grid)
    assert (tmp_path / "a.ppm").read_bytes() == ppm_bytes(grid)


def test_unwritable_destination(tmp_path):
    with pytest.raises(OSError, match="missing"):
        write_pgm(EscapeGrid(1, 1, 1, [1]), tmp_path / "missing" / "a.pgm")


def test_raw_round_trip_grid(tmp_path):
    grid = EscapeGrid(2, 2, 700, [1, 700, 65, 300], meta={"engine": "spherical"})
    side = write_raw(grid, tmp_path / "g.raw")
    assert side == sidecar_path(tmp_path / "g.raw") == tmp_path / "g.raw.txt"
    assert (tmp_path / "g.raw").read_bytes() == bytes([1, 0, 0xbc, 2, 65, 0, 0x2c, 1])
    back = read_raw(tmp_path / "g.raw")
    assert np.array_equal(back.cells.reshape(2, 2), grid.cells)
    meta = read_sidecar(side)
    assert (meta["width"], meta["height"], meta["depth"], meta["max_iter"]) == ("2", "2", "1", "700")
    assert meta["engine"] == "spherical"


def test_raw_round_trip_volume(tmp_path):
    spec = VolumeSpec(BULB8, extent=(1.2, 1.2, 1.2), resolution=(5, 6, 7), max_iter=300)
    vol = render_volume(spec)
    write_raw(vol, tmp_path / "v.raw")
    back = read_raw(tmp_path / "v.raw")
    assert (back.width, back.height, back.depth, back.max_iter) == (5, 6, 7, 300)
    assert np.array_equal(back.cells, vol.cells)
    assert back.meta["m"] == "8" and back.meta["extent"] == "1.2,1.2,1.2"


def test_raw_rejects_deep_iterations(tmp_path):
    with pytest.raises(ValueError):
        write_raw(EscapeVolume(1, 1, 1, 70000, [1]), tmp_path / "x.raw")


def test_raw_size_mismatch(tmp_path):
    write_raw(EscapeGrid(2, 1, 3, [1, 2]), tmp_path / "x.raw")
    (tmp_path / "x.raw").write_bytes(b"\x00\x00")
    with pytest.raises(ValueError):
        read_raw(tmp_path / "x.raw")


def test_csv_grid(tmp_path):
    spec = SliceSpec(COMPLEX, center=(-0.5, 0.0), extent=(1.5, 1.5), resolution=(3, 2), max_iter=10)
    grid = render_slice(spec)
    write_csv(grid_records(grid, spec), tmp_path / "g.csv")
    with open(tmp_path / "g.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["col", "row", "u", "v", "iterations"]
    assert len(rows) == 7
    assert rows[1][:2] == ["0", "0"] and float(rows[1][2]) == -1.5 and float(rows[1][3]) == 0.75
    assert [int(r[4]) for r in rows[1:]] == grid.cells.ravel().tolist()


def test_csv_needs_header_or_records(tmp_path):
    with pytest.raises(ValueError):
        write_csv([], tmp_path / "e.csv")
    write_csv([], tmp_path / "e.csv", header=["a"])
    assert (tmp_path / "e.csv").read_bytes() == b"a\r\n"


def test_metadata_line():
    grid = render_slice(SliceSpec(BULB8, resolution=(2, 2), max_iter=3))
    line = metadata_line(grid.meta)
    assert line.startswith("engine=spherical_power m=8 plane=z=0.0")
    assert "width=2 height=2 max_iter=3" in line


# -- radial profiles -------------------------------------------------------------

def test_profile_metasphere():
    prof = radial_profile(METASPHERE, (0, 0, 1), 2.0, 2001, 1000)
    assert prof[0].radius == 0.0 and prof[0].member
    assert prof[-1].radius == 2.0
    runs = member_runs([s.member for s in prof])
    assert len(runs) >= 2  # a gap between nested balls


def test_profile_beyond_two_escapes():
    prof = radial_profile(METASPHERE, (1, 2, 3), 4.0, 401, 100)
    assert all(not s.member for s in prof if s.radius > 2.0)
    assert all(s.iterations == 1 for s in prof if s.radius > 2.0)


def test_profile_directions_agree():
    a = radial_profile(METASPHERE, (1, 0, 0), 1.5, 500, 300)
    b = radial_profile(METASPHERE, (0, -3, 0), 1.5, 500, 300)
    assert [s.member for s in a] == [s.member for s in b]


@pytest.mark.parametrize("args", [
    ((0, 0, 0), 2.0, 10), ((1, 0, 0), 2.0, 1), ((1, 0, 0), 0.0, 10), ((1, 0), 2.0, 10),
    ((math.inf, 0, 0), 2.0, 10),
])
def test_profile_rejects(args):
    direction, r_max, samples = args
    with pytest.raises(ValueError):
        radial_profile(METASPHERE, direction, r_max, samples, 10)


def test_member_runs():
    assert member_runs([]) == []
    assert member_runs([True, True, False, True]) == [(0, 2), (3, 4)]
    assert member_runs([False, True, True]) == [(1, 3)]


@pytest.mark.parametrize("kwargs", [
    dict(plane="w"), dict(resolution=(0, 3)), dict(extent=(0.0, 1.0)), dict(max_iter=0),
])
def test_slice_spec_rejects(kwargs):
    with pytest.raises(ValueError):
        SliceSpec(SPHERICAL, **kwargs)
