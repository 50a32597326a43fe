import warnings

import numpy as np
import pytest

from tensorxray import fanbeam, phantoms
from tensorxray.analytic import InteriorModeField
from tensorxray.lattice import TorusLattice
from tensorxray.reconstruct import (
    assemble_even, assemble_odd, build_interior_modes, exterior_leakage, gauge_perturbed,
    gauge_poisson, harmonic_extension, lattice_mismatch, make_gauge, reconstruct, roundtrip,
    transport_oracle, transport_solution,
)
from tensorxray.tensor_core import grid_points

from conftest import forward

G = 33


def zero_lattice(m, Nmax=6, Kmax=6):
    l = TorusLattice.empty(m, Nmax, Kmax)
    l.known[:] = True
    return l


def unit_row(k, K=4):
    row = np.zeros(2 * K + 1, complex)
    row[K + k] = 1.0
    return row


@pytest.mark.parametrize("k", [0, 1, 3, -2])
def test_harmonic_extension_of_a_single_mode(k):
    z = grid_points(G)
    inside = np.abs(z) <= 1
    want = z**k if k >= 0 else np.conj(z) ** (-k)
    got = harmonic_extension(unit_row(k), z)
    assert np.max(np.abs(got - want)[inside]) < 1e-12


def test_harmonic_extension_is_radially_constant_outside():
    row = unit_row(2) + 0.5 * unit_row(-1)
    z = np.array([1.5 * np.exp(0.3j), 3.0 * np.exp(-2.0j)])
    assert np.allclose(harmonic_extension(row, z), harmonic_extension(row, z / np.abs(z)))


def test_poisson_gauge_matches_traces_and_keeps_psi0_real():
    rows = {0: unit_row(1) + unit_row(-1) + 0.3j * unit_row(2) - 0.3j * unit_row(-2), -2: unit_row(3)}
    psi = gauge_poisson(rows, 3)
    assert psi.trace_residual() < 1e-12
    assert np.max(np.abs(psi.grid(0, G).imag)) <= 1e-12


def test_missing_gauge_rows_are_reported():
    with pytest.raises(ValueError, match="missing"):
        gauge_poisson({-1: unit_row(0)}, 4)


def test_perturbed_gauge_keeps_traces_but_changes_the_interior():
    rows = {-1: unit_row(1), -3: unit_row(-2)}
    base = gauge_poisson(rows, 4)
    pert = gauge_perturbed(rows, 4, seed=5)
    assert pert.trace_residual() < 1e-12
    assert np.max(np.abs(pert.grid(-1, G) - base.grid(-1, G))) > 0.5
    assert pert.label == "perturbed:5"


def test_perturbed_gauge_targets_real_psi0_for_odd_order():
    rows = {0: unit_row(1) + unit_row(-1)}
    pert = gauge_perturbed(rows, 1, seed=2)
    assert np.max(np.abs(pert.grid(0, G).imag)) <= 1e-12
    with pytest.raises(ValueError):
        gauge_perturbed({}, 0)
    with pytest.raises(ValueError):
        make_gauge("bogus", rows, 1)


def test_zero_lattice_gives_zero_modes():
    u, rows = build_interior_modes(zero_lattice(2), G=G)
    assert np.max(np.abs(u.values)) == 0.0
    assert set(rows) == {-1}


def test_single_row_extends_to_z():
    l = zero_lattice(0)
    l[-1, 1] = 1.0
    u, _ = build_interior_modes(l, G=G)
    z = grid_points(G)
    inside = np.abs(z) <= 0.99
    assert np.max(np.abs(u.entry(-1) - z)[inside]) < 1e-9
    assert np.max(np.abs(u.values[1:])) < 1e-9


def test_order_zero_assembly_of_u_equal_z():
    # theta . grad u = 2 f with u_{-1} = z gives f_0 = Re d(z) = 1
    z = grid_points(G)
    u = InteriorModeField(1, np.stack([z, np.zeros_like(z)]))
    f = assemble_even(u, None, 0)
    inside = np.abs(z) <= 1
    assert np.allclose(f.modes[0][inside], 1.0, atol=1e-12)
    assert np.all(f.modes[0][~inside] == 0)


def test_order_two_zero_data_and_gauge():
    z = grid_points(G)
    u = InteriorModeField(3, np.zeros((2,) + z.shape, complex))
    psi = gauge_poisson({-1: np.zeros(9, complex)}, 2)
    f = assemble_even(u, psi, 1)
    assert all(np.max(np.abs(v)) == 0 for v in f.modes.values())
    with pytest.raises(ValueError):
        assemble_even(u, None, 1)


def test_order_two_assembly_from_gauge_only():
    # psi_{-1} = zbar: 2 f_2 = dbar psi_{-1} = 1 and 2 f_0 = 2 Re d psi_{-1} = 0
    z = grid_points(G)
    u = InteriorModeField(3, np.zeros((2,) + z.shape, complex))
    psi = gauge_poisson({-1: unit_row(-1)}, 2)
    f = assemble_even(u, psi, 1)
    inside = np.abs(z) <= 0.85  # stencils stay off the clamped exterior
    assert np.allclose(f.modes[2][inside], 0.5, atol=1e-12)
    assert np.allclose(f.modes[0][inside], 0.0, atol=1e-12)


def test_odd_assembly_checks_gauge():
    z = grid_points(G)
    u = InteriorModeField(2, np.zeros((2,) + z.shape, complex))
    psi = gauge_poisson({0: np.zeros(9, complex)}, 1)
    f = assemble_odd(u, psi, 0)
    assert all(np.max(np.abs(v)) == 0 for v in f.modes.values())
    psi.funcs[0] = lambda w: 1j * np.ones_like(w)
    with pytest.raises(ValueError, match="real"):
        assemble_odd(u, psi, 0)
    with pytest.raises(ValueError):
        assemble_odd(u, None, 0)


@pytest.mark.parametrize("m", [0, 1, 2])
def test_transport_oracle_reproduces_the_xray_transform(m):
    f = phantoms.bumps(m, seed=1, support=0.9)
    for beta, theta in [(0.3, 0.5), (-1.0, -0.2), (2.0, 2.9)]:
        assert abs(transport_oracle(f, beta, theta) - fanbeam.xray(f, beta, theta)) < 1e-9


def test_transport_oracle_rejects_influx_and_handles_zero():
    f = phantoms.zero(0)
    assert transport_oracle(f, 0.0, 0.1) == 0.0
    with pytest.raises(ValueError):
        transport_oracle(f, 0.0, np.pi)


def test_transport_solution_at_the_ends_of_a_chord():
    f = phantoms.pedestal(0)
    theta = 0.4
    z_out = np.exp(1j * (theta + 0.2))
    assert abs(transport_solution(f, z_out, theta) - fanbeam.xray(f, theta + 0.2, theta)) < 1e-9
    # u is odd under theta -> theta + pi for even order
    z = 0.3 + 0.2j
    assert abs(transport_solution(f, z, theta) + transport_solution(f, z, theta + np.pi)) < 1e-9
    with pytest.raises(ValueError):
        transport_solution(f, 2.0, theta)


def test_pedestal_round_trip():
    f, _, l = forward("pedestal", 0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep, fr, back, _ = roundtrip(l, 0)
    err = np.linalg.norm(fr.modes[0] - f.modes[0]) / np.linalg.norm(f.modes[0])
    assert err < 0.05
    assert max(rep.region_errors.values()) < 1e-2
    assert rep.gauge == "none"
    assert lattice_mismatch(l, l, 0) == 0.0
    assert set(rep.to_dict()) >= {"region_errors", "exterior_leakage", "flags"}


def test_reconstruction_of_zero_data_is_zero():
    f, u, psi = reconstruct(zero_lattice(2), G=G)
    assert all(np.max(np.abs(v)) == 0 for v in f.modes.values())
    assert exterior_leakage(f) == 0.0
    assert psi.trace_residual() == 0.0
