from __future__ import annotations

import csv
import json

import pytest

from qkp.cli import main


def run(argv, capsys=None):
    return main([str(a) for a in argv])


def test_dress_writes_exact_residual(tmp_path):
    out = tmp_path / "d.json"
    assert run(["dress", "--order", 3, "--flows", "2", "--out", out]) == 0
    data = json.loads(out.read_text())
    assert data["residual"] == "0"
    assert data["config"]["order"] == 3
    assert data["flows"]["t2"]["P_plus"].startswith("[2] (i)")


def test_ds2_table(tmp_path):
    out = tmp_path / "s.json"
    assert run(["ds2", "--order", 3, "--out", out]) == 0
    table = json.loads(out.read_text())["velocities"]
    assert table["u03"] == "-u03^2*u04 - u04^3 - 2*u04*u12 - 1/2*u04_yy - u14_y - 2*u24"


def test_genus0_torus_example(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run(["genus0", "--epsilon", "0.5,0", "--q1", "-1,0", "torus", "--grid", 64]) == 0
    with open(tmp_path / "genus0_torus.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", "y", "m", "re_a", "im_a", "re_b", "im_b"]
    assert len(rows) - 1 == 64 * 64 * 4
    meta = json.loads((tmp_path / "genus0_torus.json").read_text())
    assert max(max(r) for r in meta["monodromy_defects"]) < 1e-10
    assert meta["config"]["tol"] == 1e-9 and meta["config"]["box"] == 64


def test_byte_identical_and_thread_independent(tmp_path):
    outs = []
    for threads in (1, 1, 3):
        out = tmp_path / f"t{len(outs)}.csv"
        assert run(["genus0", "--epsilon", "0.3,0.2", "--q1", "-1,0", "--threads", threads,
                    "--out", out, "torus", "--grid", 16]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]
    a, b = tmp_path / "h1.json", tmp_path / "h2.json"
    assert run(["hsl", "--beta0", "1,1", "--lattice", "1,0,0,1", "--out", a, "spectrum", "--grid", 12]) == 0
    assert run(["hsl", "--beta0", "1,1", "--lattice", "1,0,0,1", "--threads", 4, "--out", b,
                "spectrum", "--grid", 12]) == 0
    assert (tmp_path / "h1.cloud.csv").read_bytes() == (tmp_path / "h2.cloud.csv").read_bytes()
    ja, jb = json.loads(a.read_text()), json.loads(b.read_text())
    ja.pop("config"), jb.pop("config"), ja.pop("cloud"), jb.pop("cloud")
    assert ja == jb


def test_genus0_spectrum(tmp_path):
    out = tmp_path / "sp.json"
    assert run(["genus0", "--epsilon", "0.5,0", "--q1", "-1,0", "--out", out, "spectrum", "--samples", 10]) == 0
    data = json.loads(out.read_text())
    assert data["spectrum"]["max_min_F"] < 1e-9
    assert len(data["spectrum"]["samples"]) == 10


def test_darboux_command(tmp_path):
    out = tmp_path / "db.csv"
    assert run(["darboux", "--epsilon", "0.5,0", "--kappa", "2,1", "--grid", 9, "--q1", "-1,0", "--out", out]) == 0
    meta = json.loads((tmp_path / "db.json").read_text())
    assert meta["tildef_residual"] < 1e-10
    assert meta["periodicity"]["max_defect"] < 1e-10
    assert abs(complex(*meta["potential_after"])) == pytest.approx(0.5)


def test_hsl_components(tmp_path):
    out = tmp_path / "h.json"
    assert run(["hsl", "--beta0", "1,1", "--lattice", "1,0,0,1", "--box", 1, "--out", out]) == 0
    data = json.loads(out.read_text())
    assert sorted(map(tuple, data["cusps"])) == [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)]


@pytest.mark.parametrize("fixture", ["vacuum", "onebox", "kp", "quaternionic", "random"])
def test_tau_fixtures(tmp_path, fixture):
    out = tmp_path / "tau.json"
    assert run(["tau", "--window", 2, "--fixture", fixture, "--samples", 2, "--out", out]) == 0
    data = json.loads(out.read_text())
    assert data["window"] == [-2, 2]
    assert data["config"]["fixture"] == fixture


def test_argument_errors_exit_2(capsys):
    assert run(["genus0", "--epsilon", "nope", "--q1", "-1,0"]) == 2
    err = json.loads(capsys.readouterr().err)
    assert "error" in err
    assert run(["frobnicate"]) == 2
    assert run(["tau", "--fixture", "unknown"]) == 2


def test_computation_errors_exit_1(tmp_path, capsys):
    assert run(["genus0", "--epsilon", "1.5,0", "--q1", "-1,0", "--out", tmp_path / "x.json"]) == 1
    assert "error" in json.loads(capsys.readouterr().err)
    assert run(["darboux", "--epsilon", "0.5,0", "--kappa", "0.5,0", "--out", tmp_path / "x.csv"]) == 1
    assert run(["hsl", "--beta0", "1/2,0", "--lattice", "1,0,0,1", "--out", tmp_path / "x.json"]) == 1
