import csv
import subprocess
import sys

import numpy as np
import pytest

from spherebrot.cli import main
from spherebrot.raster import member_runs, read_raw, read_sidecar


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def usage(capsys, *argv):
    with pytest.raises(SystemExit) as exc:
        main(list(argv))
    return exc.value.code, capsys.readouterr().err


def test_render2d_pgm(tmp_path, capsys):
    out = tmp_path / "slice.pgm"
    code, stdout, _ = run(capsys, "render2d", "--engine", "spherical", "--plane", "z=0",
                          "--center", "0,0", "--extent", "2,2", "--res", "256x256",
                          "--max-iter", "100", "--format", "pgm", "--out", str(out))
    assert code == 0
    data = out.read_bytes()
    assert data.startswith(b"P5\n256 256\n255\n") and len(data) == 15 + 256 * 256
    assert "engine=spherical" in stdout and "max_iter=100" in stdout


def test_render2d_goldenbulb_ppm(tmp_path, capsys):
    out = tmp_path / "gold.ppm"
    code, stdout, _ = run(capsys, "render2d", "--engine", "spherical-ab", "--a", "1.6180339887",
                          "--b", "2", "--res", "40x30", "--out", str(out))
    assert code == 0
    assert out.read_bytes().startswith(b"P6\n40 30\n255\n")
    assert "a=1.6180339887 b=2.0" in stdout


@pytest.mark.parametrize("fmt", ["pgm", "ppm", "csv", "raw"])
def test_render2d_byte_identical_across_workers(tmp_path, capsys, fmt):
    paths = []
    for workers in ("1", "4"):
        path = tmp_path / f"w{workers}.{fmt}"
        assert run(capsys, "render2d", "--engine", "spherical-m", "--m", "3", "--plane", "x=0.1",
                   "--res", "80x70", "--max-iter", "60", "--workers", workers, "--out", str(path))[0] == 0
        paths.append(path)
    assert paths[0].read_bytes() == paths[1].read_bytes()
    if fmt == "raw":
        assert read_sidecar(str(paths[0]) + ".txt") == read_sidecar(str(paths[1]) + ".txt")


def test_render2d_csv(tmp_path, capsys):
    out = tmp_path / "g.csv"
    run(capsys, "render2d", "--engine", "complex", "--center=-0.5,0", "--extent", "1.5,1.5",
        "--res", "3x3", "--max-iter", "10", "--out", str(out))
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    centre = next(r for r in rows if r["col"] == "1" and r["row"] == "1")
    assert centre["iterations"] == "10"


def test_render3d_mandelbulb(tmp_path, capsys):
    out = tmp_path / "bulb.raw"
    code, stdout, _ = run(capsys, "render3d", "--engine", "spherical-m", "--m", "8",
                          "--res", "64", "--out", str(out))
    assert code == 0
    vol = read_raw(out)
    assert vol.cells.shape == (64, 64, 64) and vol.max_iter == 100
    assert vol.members.any()
    assert "depth=64" in stdout


def test_render3d_metasphere_radial(tmp_path, capsys):
    out = tmp_path / "meta.raw"
    assert run(capsys, "render3d", "--engine", "quat-slice", "--units", "i,j,k", "--res", "16",
               "--extent", "1.2,1.2,1.2", "--max-iter", "200", "--out", str(out))[0] == 0
    vol = read_raw(out)
    assert read_sidecar(str(out) + ".txt")["units"] == "i,j,k"
    # the grid is symmetric under every axis flip and axis swap
    cells = vol.cells
    assert np.array_equal(cells, cells[::-1, :, :])
    assert np.array_equal(cells, np.transpose(cells, (2, 1, 0)))


def test_profile_csv(tmp_path, capsys):
    out = tmp_path / "prof.csv"
    code, _, err = run(capsys, "profile", "--engine", "quat-slice", "--units", "i,j,k",
                       "--dir", "1,0,0", "--rmax", "2", "--samples", "4096", "--out", str(out))
    assert code == 0
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 4096 and list(rows[0]) == ["radius", "iterations", "member"]
    flags = [r["member"] == "True" for r in rows]
    assert flags[0] and len(member_runs(flags)) >= 2
    assert "member_runs=" in err


def test_profile_stdout(capsys):
    code, stdout, _ = run(capsys, "profile", "--engine", "quat", "--units", "i,j,k",
                          "--samples", "5", "--rmax", "4", "--max-iter", "50")
    lines = stdout.splitlines()
    assert code == 0 and lines[0] == "radius,iterations,member" and len(lines) == 6
    assert lines[1] == "0.0,50,True" and lines[-1] == "4.0,1,False"


def test_verify_all(capsys):
    code, stdout, _ = run(capsys, "verify", "--suite", "all", "--seed", "42")
    assert code == 0
    assert len(stdout.splitlines()) == 12 and all(l.startswith("PASS") for l in stdout.splitlines())


def test_verify_single_jsonl(capsys):
    code, stdout, _ = run(capsys, "verify", "--check", "nonassociativity", "--format", "jsonl")
    assert code == 0 and stdout.count("\n") == 1 and '"passed": true' in stdout


def test_verify_failure_exit_code(capsys, monkeypatch):
    from spherebrot import spherical
    monkeypatch.setattr(spherical, "sprod", lambda p, q: p)
    code, stdout, _ = run(capsys, "verify", "--check", "nonassociativity")
    assert code == 1 and stdout.startswith("FAIL")


@pytest.mark.parametrize("argv, flag", [
    (["render2d", "--engine", "spherical-m", "--m", "1", "--out", "x.pgm"], "--m"),
    (["render3d", "--engine", "spherical"], "--out"),
    (["render3d", "--max-iter", "70000", "--out", "x.raw"], "--max-iter"),
    (["render2d", "--res", "0x4", "--out", "x.pgm"], "--res"),
    (["render2d", "--res", "abc", "--out", "x.pgm"], "--res"),
    (["render2d", "--plane", "w=1", "--out", "x.pgm"], "--plane"),
    (["render2d", "--center", "1", "--out", "x.pgm"], "--center"),
    (["render2d", "--extent", "1,-1", "--out", "x.pgm"], "--extent"),
    (["render2d", "--out", "x.bmp"], "--format"),
    (["render2d", "--engine", "quat", "--units", "1,1,i", "--out", "x.pgm"], "--units"),
    (["render2d", "--engine", "bogus", "--out", "x.pgm"], "--engine"),
    (["profile", "--samples", "1"], "--samples"),
    (["profile", "--rmax", "0"], "--rmax"),
    (["profile", "--dir", "0,0,0"], "--dir"),
    (["verify", "--check", "nope"], "--check"),
    (["verify", "--suite", "some"], "--suite"),
])
def test_usage_errors(capsys, argv, flag):
    code, err = usage(capsys, *argv)
    assert code == 2 and flag in err


def test_unknown_check_lists_valid_ids(capsys):
    _, err = usage(capsys, "verify", "--check", "nope")
    assert "nonassociativity" in err and "metasphere" in err


def test_io_error_exit_one(tmp_path, capsys):
    code, _, err = run(capsys, "render2d", "--res", "4x4", "--out", str(tmp_path / "no" / "x.pgm"))
    assert code == 1 and "no/x.pgm" in err


def test_module_entry_point(tmp_path):
    out = tmp_path / "s.pgm"
    cmd = [sys.executable, "-m", "spherebrot", "render2d", "--res", "8x8", "--out", str(out)]
    first = subprocess.run(cmd, capture_output=True, text=True)
    assert first.returncode == 0, first.stderr
    data = out.read_bytes()
    second = subprocess.run(cmd, capture_output=True, text=True)
    assert second.stdout == first.stdout and out.read_bytes() == data
    bad = subprocess.run([sys.executable, "-m", "spherebrot", "render2d"], capture_output=True)
    assert bad.returncode == 2
