import itertools

import numpy as np
import pytest

from cdforge.errors import (
    ConfigurationError,
    ContractViolationError,
    DegeneracyError,
)
from cdforge.pauli import PauliString, StateVector, to_dense
from cdforge.spectral import (
    IsingModel,
    adiabatic_state,
    build_hamiltonian,
    diagonalize,
    eigenstate_from_snapshot,
    exact_aux,
    field_derivative,
    ground_state,
)


def dense_hamiltonian_oracle(n, B, J0=1.0):
    """Independent Kronecker-product construction of the Ising chain."""
    dim = 2 ** n
    H = np.zeros((dim, dim), dtype=complex)
    for j in range(1, n + 1):
        H -= B * to_dense(PauliString((j,), ("x",)), n)
    for j in range(1, n):
        H += J0 * to_dense(PauliString((j, j + 1), ("z", "z")), n)
    return H.real


def finite_difference_aux(model, B, rate, delta=1e-5):
    """Finite-difference evaluation of the adiabatic-gauge-potential form.

    Eigenvectors at B +/- delta are gauge-fixed against the central ones
    (overlap real positive) before differencing.
    """
    w0, V0 = np.linalg.eigh(build_hamiltonian(model, B))
    dim = w0.size
    dV = np.zeros((dim, dim), dtype=complex)
    for sign, Bs in ((1.0, B + delta), (-1.0, B - delta)):
        _, V = np.linalg.eigh(build_hamiltonian(model, Bs))
        for k in range(dim):
            ov = np.vdot(V0[:, k], V[:, k])
            V[:, k] *= ov.conjugate() / abs(ov)
        dV += sign * V / (2.0 * delta)
    H_aux = np.zeros((dim, dim), dtype=complex)
    for k in range(dim):
        dk = dV[:, k]
        vk = V0[:, k].astype(complex)
        H_aux += 1j * rate * (np.outer(dk, vk.conj()) - np.vdot(vk, dk) * np.outer(vk, vk.conj()))
    return H_aux


class TestIsingModel:
    def test_rejects_bad_sizes(self):
        with pytest.raises(ConfigurationError):
            IsingModel(0)
        with pytest.raises(ConfigurationError):
            IsingModel(2, coupling=0.0)

    def test_single_site_allows_zero_coupling(self):
        IsingModel(1, coupling=0.0)


class TestBuildHamiltonian:
    def test_single_site(self):
        H = build_hamiltonian(IsingModel(1), 1.0)
        assert np.allclose(sorted(np.linalg.eigvalsh(H)), [-1.0, 1.0])
        assert np.allclose(H, -np.array([[0, 1], [1, 0]]))

    def test_two_site_zero_field(self):
        H = build_hamiltonian(IsingModel(2), 0.0)
        assert np.allclose(np.sort(np.linalg.eigvalsh(H)), [-1, -1, 1, 1])

    @pytest.mark.parametrize("n,B", [(2, 1.0), (3, 0.7), (4, 1.3)])
    def test_matches_kron_oracle(self, n, B):
        H = build_hamiltonian(IsingModel(n), B)
        assert np.allclose(H, dense_hamiltonian_oracle(n, B), atol=1e-12)
        assert np.allclose(
            np.linalg.eigvalsh(H),
            np.linalg.eigvalsh(dense_hamiltonian_oracle(n, B)),
            atol=1e-12,
        )

    def test_open_boundary_bond_count(self):
        # J0-dependent diagonal of |00..0> sums N-1 bonds
        n = 5
        H = build_hamiltonian(IsingModel(n, coupling=2.0), 0.0)
        assert H[0, 0] == pytest.approx(2.0 * (n - 1))


class TestDiagonalize:
    def test_diagonal_input(self):
        snap = diagonalize(np.diag([1.0, 2.0, 3.0]))
        assert np.allclose(snap.eigenvalues, [1, 2, 3])
        assert np.allclose(np.abs(snap.eigenvectors), np.eye(3))

    def test_reconstruction(self):
        H = build_hamiltonian(IsingModel(2), 1.0)
        snap = diagonalize(H)
        V = snap.eigenvectors
        assert np.allclose(V @ np.diag(snap.eigenvalues) @ V.conj().T, H, atol=1e-10)

    def test_residuals(self):
        H = build_hamiltonian(IsingModel(3), 1.5)
        snap = diagonalize(H)
        scale = np.linalg.norm(H, 2)
        for k in range(snap.dim):
            r = H @ snap.eigenvectors[:, k] - snap.eigenvalues[k] * snap.eigenvectors[:, k]
            assert np.linalg.norm(r) <= 1e-10 * scale

    def test_unitary_eigenvectors(self):
        snap = diagonalize(build_hamiltonian(IsingModel(3), 0.9))
        V = snap.eigenvectors
        assert np.abs(V.conj().T @ V - np.eye(snap.dim)).max() < 1e-10

    def test_rejects_non_hermitian(self):
        with pytest.raises(ContractViolationError):
            diagonalize(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestExactAux:
    def test_zero_rate(self):
        snap = diagonalize(build_hamiltonian(IsingModel(2), 1.0))
        aux = exact_aux(snap, field_derivative(IsingModel(2)), 0.0)
        assert not aux.matrix.any()

    def test_single_site_vanishes(self):
        # eigenstates of -B sigma^x do not depend on B
        m = IsingModel(1)
        snap = diagonalize(build_hamiltonian(m, 1.7), 1.7)
        aux = exact_aux(snap, field_derivative(m), 2.0)
        assert np.abs(aux.matrix).max() < 1e-12

    @pytest.mark.parametrize("n,B", [(2, 1.0), (3, 0.8), (4, 1.4)])
    def test_matches_finite_difference_oracle(self, n, B):
        m = IsingModel(n)
        snap = diagonalize(build_hamiltonian(m, B), B)
        aux = exact_aux(snap, field_derivative(m), 1.0)
        fd = finite_difference_aux(m, B, 1.0)
        assert np.abs(aux.matrix - fd).max() < 1e-6

    def test_gauge_invariance(self):
        m = IsingModel(3)
        snap = diagonalize(build_hamiltonian(m, 1.2), 1.2)
        dH = field_derivative(m)
        ref = exact_aux(snap, dH, 1.0).matrix
        rng = np.random.default_rng(9)
        phases = np.exp(2j * np.pi * rng.random(snap.dim))
        from cdforge.spectral import SpectralSnapshot

        rephased = SpectralSnapshot(
            field=snap.field,
            eigenvalues=snap.eigenvalues,
            eigenvectors=snap.eigenvectors * phases[None, :],
        )
        assert np.abs(exact_aux(rephased, dH, 1.0).matrix - ref).max() < 1e-10

    def test_purely_imaginary_antisymmetric(self):
        m = IsingModel(3)
        snap = diagonalize(build_hamiltonian(m, 0.9), 0.9)
        A = exact_aux(snap, field_derivative(m), 1.3).matrix
        assert np.abs(A.real).max() < 1e-10
        assert np.abs(A.imag + A.imag.T).max() < 1e-10

    def test_no_diagonal_in_eigenbasis(self):
        m = IsingModel(3)
        snap = diagonalize(build_hamiltonian(m, 1.1), 1.1)
        A = exact_aux(snap, field_derivative(m), 1.0).matrix
        V = snap.eigenvectors
        diag = np.diag(V.conj().T @ A @ V)
        assert np.abs(diag).max() < 1e-10

    def test_linear_in_rate(self):
        m = IsingModel(3)
        snap = diagonalize(build_hamiltonian(m, 1.3), 1.3)
        dH = field_derivative(m)
        a1 = exact_aux(snap, dH, 1.0).matrix
        a3 = exact_aux(snap, dH, 3.0).matrix
        assert np.abs(a3 - 3.0 * a1).max() < 1e-10

    def test_degenerate_pair_with_coupling_raises(self):
        # contrived snapshot: two exactly degenerate levels coupled by dH
        H = np.diag([0.0, 0.0, 1.0])
        snap = diagonalize(H)
        dH = np.zeros((3, 3))
        dH[0, 1] = dH[1, 0] = 1.0
        with pytest.raises(DegeneracyError):
            exact_aux(snap, dH, 1.0, gap_tol=1e-6)

    def test_degenerate_pair_without_coupling_is_skipped(self):
        H = np.diag([0.0, 0.0, 1.0])
        snap = diagonalize(H)
        dH = np.zeros((3, 3))
        dH[0, 2] = dH[2, 0] = 1.0
        aux = exact_aux(snap, dH, 1.0, gap_tol=1e-6)
        assert abs(aux.matrix[0, 2]) > 0.5
        assert abs(aux.matrix[0, 1]) < 1e-14


class TestAdiabaticState:
    def test_single_site_ground(self):
        m = IsingModel(1)
        psi = adiabatic_state(m, lambda t: 2.0 - t, 0.5)
        assert np.allclose(psi.amplitudes, np.array([1.0, 1.0]) / np.sqrt(2), atol=1e-12)

    def test_deterministic(self):
        m = IsingModel(3)
        prev = ground_state(m, 2.0)
        a = adiabatic_state(m, lambda t: 2.0 - t, 0.3, prev=prev)
        b = adiabatic_state(m, lambda t: 2.0 - t, 0.3, prev=prev)
        assert np.array_equal(a.amplitudes, b.amplitudes)

    def test_gauge_continuity_sweep(self):
        m = IsingModel(4)
        path = lambda t: 2.0 - t
        prev = None
        states = []
        for t in np.linspace(0.0, 1.5, 100):
            prev = adiabatic_state(m, path, t, prev=prev)
            states.append(prev.amplitudes)
        for a, b in zip(states, states[1:]):
            ov = np.vdot(a, b)
            assert ov.real > 0
            assert abs(ov.imag) < 1e-8

    def test_mirror_symmetry(self):
        # site reflection j -> N+1-j maps the ground state to itself up to phase
        n = 4
        m = IsingModel(n)
        psi = ground_state(m, 1.3).amplitudes
        idx = np.arange(2 ** n)
        reflected_idx = np.zeros_like(idx)
        for j in range(n):
            reflected_idx |= ((idx >> j) & 1) << (n - 1 - j)
        reflected = psi[np.argsort(reflected_idx)]
        overlap = abs(np.vdot(psi, reflected))
        assert overlap == pytest.approx(1.0, abs=1e-10)

    def test_degenerate_without_prev_raises(self):
        m = IsingModel(2)
        with pytest.raises(DegeneracyError):
            adiabatic_state(m, lambda t: 0.0, 0.0)

    def test_degenerate_with_prev_projects(self):
        # continuation through B -> 0 lands on the symmetric cat state
        m = IsingModel(2)
        prev = None
        for B in np.linspace(2.0, 0.0, 50):
            prev = adiabatic_state(m, lambda t, B=B: B, 0.0, prev=prev)
        amp = prev.amplitudes
        # N=2 antiferromagnetic ground pair: |01> (idx 2) and |10> (idx 1)
        assert abs(amp[1]) == pytest.approx(1 / np.sqrt(2), abs=1e-6)
        assert abs(amp[2]) == pytest.approx(1 / np.sqrt(2), abs=1e-6)
