import numpy as np
import pytest

from conftest import random_hermitian, random_state
from dotchain.errors import (
    DimensionMismatch,
    NegativeRate,
    NoMinimumFound,
    NoResonanceFound,
    NonHermitianInput,
    NormDriftExceeded,
    ValidationError,
)
from dotchain.evolve import (
    Trajectory,
    evolve_decaying,
    evolve_static,
    first_minimum,
    first_overlap_minimum,
    first_resonance,
    norm_squared,
    overlap_with,
    population,
    propagate_decaying,
    propagate_driven,
    propagate_static,
    site_population,
)
from dotchain.hamiltonian import DriveSpec, DrivenGenerator, chain_hamiltonian
from dotchain.model import HBAR, ChainSpec, Sector, StateVector, basis_state, build_basis, single_excitation

V = 0.2


def chain(n, v=V, sector=None):
    basis = build_basis(n, sector or Sector.exactly(1))
    return basis, chain_hamiltonian(ChainSpec.uniform(n, v), basis)


def test_two_site_full_transfer():
    basis, h = chain(2)
    psi = propagate_static(h, basis_state(basis, "10"), np.pi * HBAR / (2 * V))
    assert psi.population("01") == pytest.approx(1.0, abs=1e-10)


def test_two_site_matches_sine_squared():
    basis, h = chain(2)
    times = np.linspace(0, 20, 401)
    traj = evolve_static(h, basis_state(basis, "10"), times, {"P2": site_population(basis, 1)})
    np.testing.assert_allclose(traj["P2"], np.sin(V * times / HBAR) ** 2, atol=1e-12)


def test_three_site_perfect_transfer():
    basis, h = chain(3)
    t = np.pi * HBAR / (np.sqrt(2) * V)
    assert t == pytest.approx(7.31, abs=5e-3)
    psi = propagate_static(h, basis_state(basis, "100"), t)
    assert psi.population("001") == pytest.approx(1.0, abs=1e-10)


def test_zero_time_returns_input():
    basis, h = chain(4)
    psi = basis_state(basis, "0100")
    assert propagate_static(h, psi, 0.0) is psi


def test_negative_time_and_shape_errors():
    basis, h = chain(3)
    psi = basis_state(basis, "100")
    with pytest.raises(ValidationError):
        propagate_static(h, psi, -1.0)
    with pytest.raises(DimensionMismatch):
        propagate_static(np.eye(4), psi, 1.0)
    with pytest.raises(NonHermitianInput):
        propagate_static(np.triu(np.ones((3, 3))), psi, 1.0)


def test_single_site_chain_allowed():
    basis, h = chain(1)
    psi = propagate_static(h, basis_state(basis, "1"), 3.0)
    assert psi.population("1") == pytest.approx(1.0)


def test_trajectory_requires_increasing_grid():
    with pytest.raises(ValidationError):
        Trajectory(np.array([0.0, 1.0, 1.0]), np.zeros((3, 2)))


def test_trajectory_csv():
    basis, h = chain(2)
    traj = evolve_static(h, basis_state(basis, "10"), [0.0, 0.5, 1.0], {"P_end": site_population(basis, 1)})
    lines = traj.csv_text().splitlines()
    assert lines[0] == "t_ps,P_end"
    assert lines[1] == "0,0"
    assert len(lines) == 4


def test_rabi_oracle_rect_pulse():
    basis = build_basis(1)
    rabi = 2.0
    gen = DrivenGenerator(np.zeros((2, 2)), basis, [DriveSpec((0,), rabi)])
    times = np.linspace(0, 1.0, 101)
    traj = propagate_driven(gen, basis_state(basis, "0"), times, 0.01, {"P1": population(basis, "1")})
    np.testing.assert_allclose(traj["P1"], np.sin(rabi * times / HBAR) ** 2, atol=1e-7)
    t_pi = np.pi * HBAR / (2 * rabi)
    assert t_pi == pytest.approx(0.517, abs=1e-3)
    assert first_resonance(traj, "P1").time == pytest.approx(t_pi, abs=1e-4)


def test_rabi_pulse_switches_off_at_edge():
    basis = build_basis(1)
    rabi = 2.0
    t_pi = np.pi * HBAR / (2 * rabi)
    gen = DrivenGenerator(np.zeros((2, 2)), basis, [DriveSpec((0,), rabi, duration=t_pi)])
    traj = propagate_driven(gen, basis_state(basis, "0"), [0.0, 0.3, 1.0], 0.05, {"P1": population(basis, "1")})
    assert traj["P1"][-1] == pytest.approx(1.0, abs=1e-7)


def test_zero_drive_matches_static(rng):
    basis, h = chain(4, sector=Sector.all())
    psi0 = StateVector(basis, random_state(rng, basis.dim))
    times = np.linspace(0, 5, 11)
    driven = propagate_driven(DrivenGenerator(h, basis), psi0, times, 0.01)
    exact = evolve_static(h, psi0, times)
    np.testing.assert_allclose(driven.states, exact.states, atol=1e-7)


def test_driven_accepts_plain_callable():
    h = np.array([[0.0, 1.0], [1.0, 0.0]])
    traj = propagate_driven(lambda t: h, np.array([1, 0], dtype=complex), [0.0, 1.0], 0.01)
    np.testing.assert_allclose(traj.states[-1], propagate_static(h, np.array([1, 0], dtype=complex), 1.0),
                               atol=1e-8)


def test_coarse_step_raises_norm_drift():
    h = np.array([[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(NormDriftExceeded):
        propagate_driven(lambda t: h, np.array([1, 0], dtype=complex), [0.0, 50.0], 10.0,
                         norm_tol=1e-12, step_factor=0.05)


def test_weak_drive_on_coupled_control_array():
    basis = build_basis(5)
    static = chain_hamiltonian(ChainSpec.uniform(5, V), basis)
    gen = DrivenGenerator(static, basis, [DriveSpec(tuple(range(5)), V)])
    traj = propagate_driven(gen, basis_state(basis, "00000"), np.arange(0, 8, 0.02), 0.02,
                            {"P": population(basis, "11111")})
    assert traj["P"].max() < 0.9


def test_decay_single_dot():
    basis = build_basis(1)
    psi = propagate_decaying(np.zeros((2, 2)), 0.001, basis_state(basis, "1"), 20.0)
    assert psi.norm**2 == pytest.approx(np.exp(-0.02), abs=1e-12)
    assert np.exp(-0.02) == pytest.approx(0.9802, abs=1e-4)


def test_decay_vacuum_untouched():
    basis = build_basis(3)
    psi = propagate_decaying(np.zeros((8, 8)), 0.5, basis_state(basis, "000"), 10.0)
    assert psi.norm == 1.0


def test_decay_zero_rate_matches_static():
    basis, h = chain(4)
    psi0 = basis_state(basis, "1000")
    a = propagate_decaying(h, 0.0, psi0, 6.0).amplitudes
    b = propagate_static(h, psi0, 6.0).amplitudes
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_negative_rate():
    basis, h = chain(2)
    with pytest.raises(NegativeRate):
        propagate_decaying(h, [0.1, -0.1], basis_state(basis, "10"), 1.0)


def test_evolve_decaying_matches_pointwise():
    basis, h = chain(3)
    psi0 = basis_state(basis, "100")
    times = np.linspace(0, 10, 21)
    traj = evolve_decaying(h, 0.05, psi0, times, {"norm": norm_squared})
    for k in (5, 20):
        direct = propagate_decaying(h, 0.05, psi0, times[k])
        np.testing.assert_allclose(traj.states[k], direct.amplitudes, atol=1e-10)
    np.testing.assert_allclose(traj["norm"], np.exp(-0.05 * times), atol=1e-10)


def test_resonance_two_site():
    basis, h = chain(2)
    traj = evolve_static(h, basis_state(basis, "10"), np.arange(0, 12, 0.02), {"P": site_population(basis, 1)})
    res = first_resonance(traj, "P")
    assert res.time == pytest.approx(5.169, abs=1e-3)
    assert res.value == pytest.approx(1.0, abs=1e-6)


def test_no_resonance_on_monotone_or_constant_series():
    traj = Trajectory(np.arange(5.0), np.zeros((5, 1)), {"flat": np.ones(5), "up": np.arange(5.0)})
    for name in ("flat", "up"):
        with pytest.raises(NoResonanceFound):
            first_resonance(traj, name)
        with pytest.raises(NoMinimumFound):
            first_minimum(traj, name)


def test_parabolic_refinement_exact_for_parabola():
    t = np.arange(0, 2.01, 0.1)
    y = 1 - (t - 0.73) ** 2
    traj = Trajectory(t, np.zeros((len(t), 1)), {"y": y})
    res = first_resonance(traj, "y")
    assert res.time == pytest.approx(0.73, abs=1e-12)
    assert res.value == pytest.approx(1.0, abs=1e-12)


def test_overlap_minimum_unblocked_chain():
    basis, h = chain(5)
    psi0 = basis_state(basis, "10000")
    traj = evolve_static(h, psi0, np.arange(0, 10, 0.01), {"overlap": overlap_with(psi0)})
    assert first_overlap_minimum(traj).value < 0.5


# ---- seeded property checks (100 random instances each) ---------------------


def test_norm_conservation_property(rng):
    for _ in range(100):
        dim = int(rng.integers(2, 12))
        h = random_hermitian(rng, dim)
        psi = random_state(rng, dim)
        out = propagate_static(h, psi, float(rng.uniform(0, 50)))
        assert abs(np.linalg.norm(out) - 1) < 1e-9


def test_excitation_sector_conservation_property(rng):
    for _ in range(100):
        n = int(rng.integers(2, 6))
        spec = ChainSpec.uniform(n, float(rng.uniform(0.05, 1.0)))
        basis = build_basis(n)
        h = chain_hamiltonian(spec, basis)
        psi0 = StateVector(basis, random_state(rng, basis.dim))
        psi = propagate_static(h, psi0, float(rng.uniform(0, 30)))
        np.testing.assert_allclose(psi.sector_populations(), psi0.sector_populations(), atol=1e-9)


def test_propagator_composition_property(rng):
    for _ in range(100):
        dim = int(rng.integers(2, 10))
        h = random_hermitian(rng, dim)
        psi = random_state(rng, dim)
        t1, t2 = rng.uniform(0, 10, size=2)
        once = propagate_static(h, psi, t1 + t2)
        twice = propagate_static(h, propagate_static(h, psi, t1), t2)
        np.testing.assert_allclose(once, twice, atol=1e-9)


def test_mirror_symmetry_property(rng):
    for _ in range(100):
        n = int(rng.integers(2, 12))
        basis, h = chain(n, float(rng.uniform(0.05, 1.0)))
        times = np.linspace(0, float(rng.uniform(1, 30)), 50)
        fwd = evolve_static(h, basis_state(basis, single_excitation(n, 0)), times,
                            {"P": site_population(basis, n - 1)})
        bwd = evolve_static(h, basis_state(basis, single_excitation(n, n - 1)), times,
                            {"P": site_population(basis, 0)})
        np.testing.assert_allclose(fwd["P"], bwd["P"], atol=1e-9)


def test_decay_factorization_property(rng):
    for _ in range(100):
        n = int(rng.integers(1, 6))
        basis = build_basis(n)
        h = chain_hamiltonian(ChainSpec.uniform(n, float(rng.uniform(0, 1))), basis)
        k = int(rng.integers(0, n + 1))
        occ = "".join("1" if i < k else "0" for i in range(n))
        gamma, t = float(rng.uniform(0, 0.1)), float(rng.uniform(0, 30))
        psi = propagate_decaying(h, gamma, basis_state(basis, occ), t)
        assert psi.norm**2 == pytest.approx(np.exp(-gamma * t * k), abs=1e-9)
