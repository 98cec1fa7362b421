from math import comb

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import SX, SY, SZ, boson_hamiltonian, fermion_hamiltonian, site_op, ssh_open_chain
from rydssh.geometry import CouplingMatrix, build_magic_chain, coupling_matrix, nearest_neighbor_chain
from rydssh.mbcore import (
    MAX_SITES,
    ContractViolation,
    FockBasis,
    HamiltonianSpec,
    ResourceLimitError,
    StateVector,
    apply_local_z_rotation,
    apply_symmetry_SB,
    build_boson_hamiltonian,
    build_fermion_hamiltonian,
    build_xxz_hamiltonian,
    drive_operator,
    is_hermitian,
    number_operator,
    popcount,
    symmetry_residual_SB,
)


def random_couplings(rng, n, scale=1.0):
    v = np.triu(rng.normal(scale=scale, size=(n, n)), 1)
    return CouplingMatrix(v + v.T)


@given(st.integers(1, 12), st.data())
def test_sector_enumeration_and_ranking(n, data):
    k = data.draw(st.integers(0, n))
    b = FockBasis(n, k)
    assert b.dimension == comb(n, k)
    s = b.states
    assert np.all(np.diff(s) > 0)
    assert np.all(popcount(s) == k)
    assert np.array_equal(b.rank(s), np.arange(b.dimension))
    assert np.array_equal(b.unrank(b.rank(s)), s)


def test_ranking_large_sector():
    b = FockBasis(20, 10)
    assert b.dimension == 184756
    idx = np.array([0, 1, 12345, b.dimension - 1])
    assert np.array_equal(b.rank(b.unrank(idx)), idx)


def test_resource_ceiling():
    with pytest.raises(ResourceLimitError):
        FockBasis(MAX_SITES + 1)
    op = number_operator(FockBasis(15))
    with pytest.raises(ResourceLimitError):
        op.to_dense()


def test_basis_state_and_vacuum():
    b = FockBasis(4, 2)
    psi = StateVector.basis_state(b, [0, 3])
    assert psi.norm == 1.0
    assert int(b.states[np.argmax(np.abs(psi.amps))]) == 0b1001
    with pytest.raises(ValueError):
        StateVector.basis_state(b, [0])
    full = psi.to_full()
    assert full.amps[0b1001] == 1.0
    assert StateVector.vacuum(FockBasis(3)).amps[0] == 1.0


@settings(max_examples=15)
@given(st.integers(2, 6), st.floats(-2, 2), st.floats(0, 2), st.integers(0, 2**31))
def test_full_hamiltonian_matches_kron_oracle(n, det, drive, seed):
    rng = np.random.default_rng(seed)
    J = random_couplings(rng, n)
    V = rng.normal(size=(n, n))
    V = np.triu(V, 1) + np.triu(V, 1).T
    spec = HamiltonianSpec(J, drive=drive, detuning=det, density_density=V)
    ours = build_boson_hamiltonian(spec).to_dense()
    ref = boson_hamiltonian(J.values, det, drive, V)
    assert np.abs(ours - ref).max() < 1e-12


@settings(max_examples=10)
@given(st.integers(2, 7), st.integers(0, 2**31))
def test_sector_blocks_match_oracle_spectrum(n, seed):
    rng = np.random.default_rng(seed)
    J = random_couplings(rng, n)
    ref = np.linalg.eigvalsh(boson_hamiltonian(J.values))
    ours = np.concatenate([np.linalg.eigvalsh(build_boson_hamiltonian(HamiltonianSpec(J), FockBasis(n, k)).to_dense())
                           for k in range(n + 1)])
    assert np.allclose(np.sort(ours), ref, atol=1e-11)


def test_fermion_operator_matches_jw_oracle():
    rng = np.random.default_rng(3)
    J = random_couplings(rng, 5)
    ours = build_fermion_hamiltonian(J, FockBasis(5)).to_dense()
    assert np.abs(ours - fermion_hamiltonian(J.values)).max() < 1e-12


@pytest.mark.parametrize("n", [4, 6, 8, 10])
def test_jordan_wigner_equivalence_nearest_neighbour(n):
    J = nearest_neighbor_chain(n, 2.42, -0.92)
    for k in range(n + 1):
        b = FockBasis(n, k)
        eb = np.linalg.eigvalsh(build_boson_hamiltonian(HamiltonianSpec(J), b).to_dense())
        ef = np.linalg.eigvalsh(build_fermion_hamiltonian(J, b).to_dense())
        assert np.abs(eb - ef).max() < 1e-10


def test_jordan_wigner_broken_by_same_sublattice_hop():
    J = nearest_neighbor_chain(6, 2.42, -0.92).with_entry(0, 2, 0.26)
    eb = np.linalg.eigvalsh(build_boson_hamiltonian(HamiltonianSpec(J)).to_dense())
    ef = np.linalg.eigvalsh(build_fermion_hamiltonian(J, FockBasis(6)).to_dense())
    assert np.abs(eb - ef).max() > 1e-3


def test_zz_expansion_matches_pauli_oracle():
    n = 4
    rng = np.random.default_rng(5)
    K = rng.normal(size=(n, n))
    K = np.triu(K, 1) + np.triu(K, 1).T
    spec = HamiltonianSpec(nearest_neighbor_chain(n, 0.0, 0.0), zz=K)
    ref = sum(K[i, j] * site_op(SZ, i, n) @ site_op(SZ, j, n) for i in range(n) for j in range(i + 1, n))
    assert np.abs(build_boson_hamiltonian(spec).to_dense() - ref).max() < 1e-12


def test_xxz_matches_spin_oracle():
    n, J, Jp, delta = 8, -1.0, 0.25, 0.7
    ours = build_boson_hamiltonian(build_xxz_hamiltonian(J, Jp, delta, n)).to_dense()
    ref = np.zeros((2**n, 2**n), dtype=complex)
    for k in range(n - 1):
        c = Jp if k % 2 == 0 else J
        for P, w in ((SX, 1.0), (SY, 1.0), (SZ, delta)):
            ref += -0.5 * c * w * site_op(P, k, n) @ site_op(P, k + 1, n)
    assert np.abs(ours - ref).max() < 1e-12


def test_drive_contract():
    J = nearest_neighbor_chain(4, 1.0, 0.5)
    with pytest.raises(ContractViolation):
        build_boson_hamiltonian(HamiltonianSpec(J, drive=1.0), FockBasis(4, 2))
    with pytest.raises(ContractViolation):
        drive_operator(FockBasis(4, 1))


def test_operator_algebra_and_hermiticity():
    J = coupling_matrix(build_magic_chain(6, 2.42, -0.92))
    b = FockBasis(6)
    op = build_boson_hamiltonian(HamiltonianSpec(J)) + drive_operator(b).scaled(0.7) + number_operator(b).scaled(-0.3)
    assert is_hermitian(op)
    ref = boson_hamiltonian(J.values, 0.3, 0.7)
    assert np.abs(op.to_dense() - ref).max() < 1e-12
    v = np.random.default_rng(0).normal(size=(op.dim, 3))
    assert np.allclose(op.matvec(v), ref @ v)
    assert op.norm_bound() >= np.abs(np.linalg.eigvalsh(ref)).max() - 1e-12


def test_particle_number_conserved_without_drive():
    J = coupling_matrix(build_magic_chain(6, 2.42, -0.92))
    H = build_boson_hamiltonian(HamiltonianSpec(J)).to_dense()
    N = number_operator(FockBasis(6)).to_dense()
    assert np.abs(H @ N - N @ H).max() < 1e-12


def test_sb_symmetry_and_its_breaking():
    J = coupling_matrix(build_magic_chain(8, 2.42, -0.92))
    op = build_boson_hamiltonian(HamiltonianSpec(J))
    assert symmetry_residual_SB(op) < 1e-12
    assert symmetry_residual_SB(build_boson_hamiltonian(HamiltonianSpec(J, detuning=0.5))) > 1e-3
    # a same-sublattice hop keeps the bosonic symmetry
    op2 = build_boson_hamiltonian(HamiltonianSpec(J.with_entry(5, 7, 0.26)))
    assert symmetry_residual_SB(op2) < 1e-12
    psi = StateVector(FockBasis(3), np.arange(8) + 1j)
    twice = apply_symmetry_SB(apply_symmetry_SB(psi))
    assert np.array_equal(twice.amps, psi.amps)


def test_local_z_rotation_flips_hopping_sign():
    # a pi rotation on every second site maps H0 to -H0
    J = nearest_neighbor_chain(6, 2.0, -0.5)
    op = build_boson_hamiltonian(HamiltonianSpec(J))
    rot = apply_local_z_rotation(op, range(0, 6, 2), np.pi)
    assert np.abs(rot.to_dense() + op.to_dense()).max() < 1e-12
    u = np.diag(np.exp(-0.5j * 0.4 * sum(np.diag(site_op(SZ, k, 6)) for k in (1, 4))))
    rot = apply_local_z_rotation(op, (1, 4), 0.4)
    assert np.abs(rot.to_dense() - u @ op.to_dense() @ u.conj().T).max() < 1e-12


def test_subchain_of_spec():
    J = nearest_neighbor_chain(4, 2.0, 1.0)
    spec = HamiltonianSpec(J, fields=np.arange(4.0)).add_zz(0, 3, 0.5)
    sub = spec.subchain([True, False, True, True])
    assert sub.n_sites == 3
    assert np.array_equal(sub.fields, [0.0, 2.0, 3.0])
    assert sub.zz[0, 2] == 0.5
