import numpy as np
import pytest

from conftest import random_hermitian
from dotchain.errors import DimensionMismatch, SectorViolation, ValidationError
from dotchain.hamiltonian import (
    BlockSpec,
    DriveSpec,
    DrivenGenerator,
    apply_block,
    chain_hamiltonian,
    check_hermitian,
    drive_hamiltonian,
    is_hermitian,
    number_operator,
    pair_shift,
)
from dotchain.errors import NonHermitianInput
from dotchain.model import ChainSpec, DotSpec, Sector, build_basis


def test_two_site_matrix():
    basis = build_basis(2, Sector.exactly(1))
    h = chain_hamiltonian(ChainSpec.uniform(2, 0.2), basis)
    np.testing.assert_allclose(h, [[0, 0.2], [0.2, 0]], atol=0)


def test_three_site_spectrum():
    v = 0.2
    h = chain_hamiltonian(ChainSpec.uniform(3, v), build_basis(3, Sector.exactly(1)))
    np.testing.assert_allclose(np.linalg.eigvalsh(h), [-np.sqrt(2) * v, 0, np.sqrt(2) * v], atol=1e-14)


@pytest.mark.parametrize("n", [1, 2, 5, 7])
def test_commutes_with_number(n):
    basis = build_basis(n)
    h = chain_hamiltonian(ChainSpec.uniform(n, 0.3, energy=1.1), basis)
    num = number_operator(basis)
    assert np.abs(h @ num - num @ h).max() == 0.0
    k = basis.excitation_numbers
    assert np.all(h[k[:, None] != k[None, :]] == 0)


def test_site_energies_on_diagonal():
    chain = ChainSpec((DotSpec(1.0), DotSpec(2.0), DotSpec(4.0)), (0.1, 0.1))
    basis = build_basis(3)
    h = chain_hamiltonian(chain, basis)
    assert h[basis.index_of("111"), basis.index_of("111")] == 7.0
    assert h[basis.index_of("010"), basis.index_of("010")] == 2.0


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        chain_hamiltonian(ChainSpec.uniform(3, 0.2), build_basis(4))


def test_block_middle_sites():
    basis = build_basis(5, Sector.exactly(1))
    h = chain_hamiltonian(ChainSpec.uniform(5, 0.2), basis)
    hb = apply_block(h, basis, BlockSpec((1, 2, 3), 4.0))
    np.testing.assert_allclose(np.diag(hb).real, [0, 4, 4, 4, 0])
    off = ~np.eye(5, dtype=bool)
    np.testing.assert_array_equal(hb[off], h[off])


def test_block_zero_shift_is_identity():
    basis = build_basis(4)
    h = chain_hamiltonian(ChainSpec.uniform(4, 0.2), basis)
    np.testing.assert_array_equal(apply_block(h, basis, BlockSpec((0, 1, 2, 3), 0.0)), h)


def test_block_single_end_site():
    basis = build_basis(4, Sector.exactly(1))
    h = chain_hamiltonian(ChainSpec.uniform(4, 0.2), basis)
    d = np.diag(apply_block(h, basis, BlockSpec((3,), -1.5))).real
    np.testing.assert_allclose(d, [0, 0, 0, -1.5])


def test_block_counts_each_occupied_site():
    basis = build_basis(3)
    hb = apply_block(np.zeros((8, 8)), basis, BlockSpec((0, 1), 2.0))
    assert hb[basis.index_of("110"), basis.index_of("110")] == 4.0
    assert hb[basis.index_of("001"), basis.index_of("001")] == 0.0


def test_pair_shift():
    basis = build_basis(2)
    np.testing.assert_array_equal(np.diag(pair_shift(basis, 0, 1, 3.0)).real, [0, 0, 0, 3])


def test_single_dot_drive_matrix():
    basis = build_basis(1)
    d = DriveSpec((0,), 2.0, duration=1.0)
    np.testing.assert_allclose(drive_hamiltonian(d, basis, 0.5), [[0, 2], [2, 0]])
    np.testing.assert_array_equal(drive_hamiltonian(d, basis, 1.5), np.zeros((2, 2)))


def test_drive_detuning_and_phase():
    basis = build_basis(2)
    d = DriveSpec((0, 1), 1.0, detuning=(0.5, -0.25), phase=np.pi / 2)
    h = drive_hamiltonian(d, basis, 0.0)
    assert is_hermitian(h)
    assert h[basis.index_of("11"), basis.index_of("11")] == pytest.approx(0.25)
    assert h[basis.index_of("10"), basis.index_of("00")] == pytest.approx(1j)


def test_drive_linear_in_rabi():
    basis = build_basis(3)
    h1 = drive_hamiltonian(DriveSpec((0, 2), 1.0), basis, 0.0)
    h3 = drive_hamiltonian(DriveSpec((0, 2), 3.0), basis, 0.0)
    np.testing.assert_allclose(h3, 3 * h1)


def test_drive_gaussian_envelope_peaks_at_centre():
    d = DriveSpec((0,), 1.0, start=1.0, duration=2.0, envelope="gaussian", sigma=0.3)
    assert d.envelope_at(2.0) == 1.0
    assert d.envelope_at(1.0) == pytest.approx(np.exp(-0.5 / 0.09))
    assert d.envelope_at(3.5) == 0.0


def test_drive_requires_open_sector():
    with pytest.raises(SectorViolation):
        drive_hamiltonian(DriveSpec((0,), 1.0), build_basis(3, Sector.exactly(1)), 0.0)
    h = drive_hamiltonian(DriveSpec((0,), 1.0), build_basis(3, Sector.at_most(1)), 0.0)
    assert is_hermitian(h)


@pytest.mark.parametrize("kwargs", [dict(rabi=-1.0), dict(duration=0.0), dict(envelope="sinc"),
                                    dict(envelope="gaussian")])
def test_drive_validation(kwargs):
    args = dict(target_sites=(0,), rabi=1.0) | kwargs
    with pytest.raises(ValidationError):
        DriveSpec(**args)


def test_generator_matches_sum_of_parts():
    basis = build_basis(3)
    static = chain_hamiltonian(ChainSpec.uniform(3, 0.2), basis)
    drives = [DriveSpec((0, 1, 2), 5.0, duration=0.3), DriveSpec((1,), 1.0, start=0.2, duration=0.5, detuning=0.1)]
    gen = DrivenGenerator(static, basis, drives)
    for t in (0.0, 0.25, 0.6, 1.0):
        expected = static + sum(drive_hamiltonian(d, basis, t) for d in drives)
        np.testing.assert_allclose(gen(t), expected, atol=1e-14)
        assert np.linalg.norm(gen(t), 2) <= gen.norm_bound() + 1e-12
    assert gen.breakpoints() == [0.0, 0.2, 0.3, 0.7]


def test_every_constructed_matrix_hermitian(rng):
    for _ in range(100):
        n = int(rng.integers(1, 6))
        chain = ChainSpec(tuple(DotSpec(float(e)) for e in rng.normal(size=n)),
                          tuple(float(v) for v in rng.normal(size=n - 1)))
        basis = build_basis(n)
        h = chain_hamiltonian(chain, basis)
        h = apply_block(h, basis, BlockSpec(tuple(range(n)), float(rng.normal())))
        check_hermitian(h)
        d = DriveSpec(tuple(range(n)), float(rng.uniform(0, 3)), phase=float(rng.uniform(0, 6)))
        check_hermitian(drive_hamiltonian(d, basis, 0.0))


def test_check_hermitian_rejects():
    with pytest.raises(NonHermitianInput):
        check_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))
