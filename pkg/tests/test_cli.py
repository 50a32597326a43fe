import json

import numpy as np
import pytest

from tensorxray import io
from tensorxray.cli import DEFAULTS, config_hash, main

SMALL = ["--N", "64", "--nodes", "32", "--grid", "32", "--Nmax", "20", "--Kmax", "20"]


def run(*args):
    return main([str(a) for a in args])


@pytest.fixture
def pipeline(tmp_path):
    sino = tmp_path / "s.xtsg"
    lat = tmp_path / "l.csv"
    assert run("forward", "--phantom", "pedestal", "--out", sino, *SMALL) == 0
    assert run("analyze", sino, "--out", lat, *SMALL) == 0
    return tmp_path, sino, lat


def test_forward_pedestal_peak(tmp_path):
    out = tmp_path / "s.json"
    assert run("forward", "--phantom", "pedestal", "--format", "json", "--out", out, *SMALL) == 0
    body = json.loads(out.read_text())
    assert body["N"] == 64
    assert abs(np.max(body["values"]) - 4 / 3) < 1e-3


def test_zero_phantom_passes_every_check(tmp_path):
    sino, lat, rep = tmp_path / "s", tmp_path / "l", tmp_path / "r.json"
    assert run("forward", "--phantom", "zero", "--out", sino, *SMALL) == 0
    assert run("analyze", sino, "--out", lat, *SMALL) == 0
    assert run("check", lat, "--out", rep) == 0
    assert json.loads(rep.read_text())["pass"] is True


def test_check_report_and_failure_exit(pipeline, capsys):
    tmp, _, lat = pipeline
    rep = tmp / "r.json"
    assert run("check", lat, "--out", rep) == 0
    body = json.loads(rep.read_text())
    assert set(body["families"]) == {"parity", "conjugacy", "symmetry", "moments", "W", "G", "R", "diagonal"}
    l = io.read_lattice(lat)
    l[-1, 3] = l[-1, 3] + 0.5
    bad = tmp / "bad.csv"
    io.write_lattice(bad, l)
    assert run("check", bad, "--out", rep) == 1
    assert "failing families" in capsys.readouterr().err


def test_complete_and_reconstruct(pipeline):
    tmp, _, lat = pipeline
    done = tmp / "done.json"
    from tensorxray.range_checks import restrict_to_generators
    io.write_lattice(tmp / "gen.csv", restrict_to_generators(io.read_lattice(lat)))
    assert run("complete", tmp / "gen.csv", "--format", "json", "--out", done) == 0
    assert io.read_lattice(done).m == 0
    out, rep = tmp / "f.xttf", tmp / "rep.json"
    assert run("reconstruct", lat, "--grid", 32, "--out", out, "--report", rep) == 0
    f = io.read_tensor_field(out)
    assert f.G == 32 and f.m == 0
    assert json.loads(rep.read_text())["gauge"] == "none"


def test_usage_errors(tmp_path):
    assert run("bogus") == 2
    assert run("check", tmp_path / "missing.csv") == 2
    assert run("forward", "--N", 63) == 2
    assert run("forward", "--phantom", "pedestal", *SMALL) == 2  # binary needs --out
    (tmp_path / "c.json").write_text('{"colour": 1}')
    assert run("forward", "--config", tmp_path / "c.json") == 2
    (tmp_path / "x.csv").write_text("not a lattice\n")
    assert run("check", tmp_path / "x.csv") == 2


def test_config_values_and_flag_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"N": 32, "nodes": 16, "phantom": "zero"}))
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("forward", "--config", cfg, "--format", "json", "--out", a) == 0
    assert json.loads(a.read_text())["N"] == 32
    assert run("forward", "--config", cfg, "--N", 16, "--format", "json", "--out", b) == 0
    assert json.loads(b.read_text())["N"] == 16


def test_config_hash_is_deterministic():
    a = dict(DEFAULTS)
    b = dict(reversed(list(DEFAULTS.items())))
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash(a | {"m": 1})
    assert len(config_hash(a)) == 16


def test_roundtrip_command(tmp_path):
    out = tmp_path / "rt.json"
    code = run("roundtrip", "--phantom", "pedestal", "--out", out, "--tol", 0.05,
               "--N", 128, "--Nmax", 40, "--Kmax", 40, "--grid", 64)
    body = json.loads(out.read_text())
    assert code == (0 if body["pass"] else 1)
    assert body["tolerance"] == 0.05
    assert set(body["region_errors"]) == {"G", "R"}
