import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tensorxray import io, phantoms
from tensorxray.fanbeam import FanBeamSinogram
from tensorxray.lattice import TorusLattice
from tensorxray.range_checks import complete_from_generators


def test_tensor_field_round_trip_is_bit_exact(tmp_path):
    f = phantoms.bumps(3, seed=2, G=24)
    path = tmp_path / "f.xttf"
    io.write_tensor_field(path, f)
    g = io.read_tensor_field(path)
    assert g.m == 3 and g.G == 24 and g.support_radius == f.support_radius
    for n in f.modes:
        assert np.array_equal(f.modes[n], g.modes[n])


def test_sinogram_round_trip_is_bit_exact(tmp_path, rng):
    s = FanBeamSinogram(2, rng.standard_normal((8, 8)), 32)
    io.write_sinogram(tmp_path / "s.xtsg", s)
    t = io.read_sinogram(tmp_path / "s.xtsg")
    assert (t.m, t.N, t.nodes) == (2, 8, 32)
    assert np.array_equal(s.values, t.values)


def test_bad_magic_and_truncation(tmp_path):
    p = tmp_path / "x.bin"
    p.write_bytes(b"NOPE" + bytes(40))
    with pytest.raises(io.FormatError):
        io.read_sinogram(p)
    io.write_sinogram(p, FanBeamSinogram(0, np.zeros((4, 4)), 8))
    p.write_bytes(p.read_bytes()[:-8])
    with pytest.raises(io.FormatError):
        io.read_sinogram(p)


def random_lattice(rng, m=1, Nmax=5, Kmax=4, fill=0.5):
    l = TorusLattice.empty(m, Nmax, Kmax)
    for n in range(-Nmax, Nmax + 1):
        for k in range(-Kmax, Kmax + 1):
            if rng.uniform() < fill:
                l[n, k] = complex(*rng.standard_normal(2))
    l.flags = ["truncation: test"]
    return l


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["csv", "json"]))
def test_lattice_text_round_trip(seed, fmt):
    l = random_lattice(np.random.default_rng(seed))
    text = json.dumps(io.lattice_to_json(l)) if fmt == "json" else io.lattice_to_csv(l)
    back = io.lattice_from_json(json.loads(text)) if fmt == "json" else io.lattice_from_csv(text)
    assert np.array_equal(back.known, l.known)
    assert np.array_equal(back.coeffs, l.coeffs)
    assert back.flags == l.flags


def test_lattice_files_detect_format(tmp_path, rng):
    l = random_lattice(rng)
    for fmt in ("csv", "json"):
        io.write_lattice(tmp_path / fmt, l, fmt)
        assert np.array_equal(io.read_lattice(tmp_path / fmt).coeffs, l.coeffs)


def test_duplicates_and_band():
    head = "# XTLT v1 m=0 Nmax=2 Kmax=2\n"
    same = io.lattice_from_csv(head + "-1,1,0.5,0.0\n-1,1,0.5,0.0\n")
    assert same[-1, 1] == 0.5
    with pytest.raises(io.FormatError, match="duplicate"):
        io.lattice_from_csv(head + "-1,1,0.5,0.0\n-1,1,0.25,0.0\n")
    with pytest.raises(io.FormatError, match="band"):
        io.lattice_from_csv(head + "-3,1,0.5,0.0\n")
    with pytest.raises(io.FormatError):
        io.lattice_from_csv("n,k,re,im\n")
    with pytest.raises(io.FormatError):
        io.lattice_from_json({"format": "OTHER"})


def test_completed_lattice_keeps_unknown_entries(rng):
    l = TorusLattice.empty(2, 4, 3)
    l[-3, 1] = 1.0
    done = complete_from_generators(l)
    back = io.lattice_from_json(json.loads(json.dumps(io.lattice_to_json(done))))
    assert np.array_equal(back.known, done.known)


def test_text_exports_have_headers():
    f = phantoms.pedestal(1, G=4)
    rows = io.tensor_csv(f).splitlines()
    assert rows[0] == "x,y,ftilde_0,ftilde_1" and len(rows) == 17
    s = FanBeamSinogram(0, np.zeros((4, 4)), 8)
    assert io.sinogram_csv(s).splitlines()[0] == "beta,theta,value"
