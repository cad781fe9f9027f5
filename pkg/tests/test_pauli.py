import itertools

import numpy as np
import pytest

from cdforge.errors import ConfigurationError, ResourceLimitError
from cdforge.pauli import (
    COMPONENTS,
    PauliString,
    StateVector,
    apply,
    real_pair_overlap,
    to_dense,
)


def random_state(n, rng):
    v = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return StateVector(v / np.linalg.norm(v), n)


def random_string(n, rng, max_body=None):
    k = rng.integers(1, (max_body or n) + 1)
    sites = rng.choice(np.arange(1, n + 1), size=k, replace=False)
    comps = rng.choice(COMPONENTS, size=k)
    return PauliString(tuple(sites), tuple(comps))


class TestPauliString:
    def test_canonical_ordering(self):
        a = PauliString((3, 1), ("z", "y"))
        b = PauliString((1, 3), ("y", "z"))
        assert a == b
        assert a.sites == (1, 3)
        assert a.components == ("y", "z")
        assert hash(a) == hash(b)

    def test_rejects_duplicate_sites(self):
        with pytest.raises(ConfigurationError):
            PauliString((2, 2), ("x", "y"))

    def test_rejects_empty_support(self):
        with pytest.raises(ConfigurationError):
            PauliString((), ())

    def test_rejects_bad_component(self):
        with pytest.raises(ConfigurationError):
            PauliString((1,), ("w",))

    def test_rejects_length_mismatch(self):
        with pytest.raises(ConfigurationError):
            PauliString((1, 2), ("x",))

    def test_span(self):
        assert PauliString((2, 5), ("y", "z")).span == 3


class TestApply:
    def test_sigma_x_flips(self):
        psi = StateVector([1, 0], 1)
        out = apply(PauliString((1,), ("x",)), psi)
        assert np.allclose(out.amplitudes, [0, 1])

    def test_sigma_y_phase(self):
        psi = StateVector([1, 0], 1)
        out = apply(PauliString((1,), ("y",)), psi)
        assert np.allclose(out.amplitudes, [0, 1j])
        back = apply(PauliString((1,), ("y",)), StateVector([0, 1], 1))
        assert np.allclose(back.amplitudes, [-1j, 0])

    def test_zz_opposite_spins(self):
        # |01> = site 1 in |0>, site 2 in |1> -> basis index 2
        amp = np.zeros(4)
        amp[2] = 1.0
        psi = StateVector(amp, 2)
        out = apply(PauliString((1, 2), ("z", "z")), psi)
        assert np.allclose(out.amplitudes, -amp)

    def test_site_out_of_range(self):
        psi = StateVector([1, 0], 1)
        with pytest.raises(ConfigurationError):
            apply(PauliString((2,), ("x",)), psi)

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(7)
        n = 3
        for _ in range(100):
            p = random_string(n, rng)
            psi = random_state(n, rng)
            expected = to_dense(p, n) @ psi.amplitudes
            assert np.allclose(apply(p, psi).amplitudes, expected, atol=1e-12)

    def test_norm_preserved(self):
        rng = np.random.default_rng(11)
        psi = random_state(4, rng)
        out = apply(random_string(4, rng), psi)
        assert abs(np.linalg.norm(out.amplitudes) - 1.0) < 1e-12

    def test_involution(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            p = random_string(4, rng)
            psi = random_state(4, rng)
            twice = apply(p, apply(p, psi))
            assert np.allclose(twice.amplitudes, psi.amplitudes, atol=1e-12)

    def test_disjoint_supports_commute(self):
        rng = np.random.default_rng(5)
        p = PauliString((1, 2), ("y", "z"))
        q = PauliString((3, 4), ("x", "y"))
        psi = random_state(4, rng)
        pq = apply(p, apply(q, psi))
        qp = apply(q, apply(p, psi))
        assert np.allclose(pq.amplitudes, qp.amplitudes, atol=1e-12)


class TestToDense:
    def test_sigma_z_diag(self):
        assert np.allclose(to_dense(PauliString((1,), ("z",)), 1), np.diag([1, -1]))

    def test_single_x_embedding(self):
        m = to_dense(PauliString((1,), ("x",)), 2)
        sx = np.array([[0, 1], [1, 0]])
        assert np.allclose(m, np.kron(np.eye(2), sx))

    def test_hermitian_unitary_all_supports(self):
        for n in range(1, 5):
            for k in range(1, n + 1):
                for sites in itertools.combinations(range(1, n + 1), k):
                    for comps in itertools.product(COMPONENTS, repeat=k):
                        m = to_dense(PauliString(sites, comps), n)
                        assert np.allclose(m, m.conj().T, atol=1e-14)
                        assert np.allclose(m @ m, np.eye(2 ** n), atol=1e-14)

    def test_site_cap(self):
        with pytest.raises(ResourceLimitError):
            to_dense(PauliString((1,), ("x",)), 13)


class TestRealPairOverlap:
    def test_self_overlap(self):
        rng = np.random.default_rng(2)
        psi = random_state(3, rng)
        assert real_pair_overlap(psi, psi) == pytest.approx(2.0, abs=1e-12)

    def test_imaginary_partner(self):
        rng = np.random.default_rng(4)
        psi = random_state(3, rng)
        assert real_pair_overlap(psi, 1j * psi.amplitudes) == pytest.approx(0.0, abs=1e-12)

    def test_symmetric(self):
        rng = np.random.default_rng(6)
        a, b = random_state(3, rng), random_state(3, rng)
        assert real_pair_overlap(a, b) == pytest.approx(real_pair_overlap(b, a), abs=1e-14)

    def test_trace_oracle(self):
        rng = np.random.default_rng(8)
        a, b = random_state(3, rng), random_state(3, rng)
        outer = np.outer(b.amplitudes, a.amplitudes.conj())
        expected = np.trace(outer + outer.conj().T).real
        assert real_pair_overlap(a, b) == pytest.approx(expected, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ConfigurationError):
            real_pair_overlap(np.ones(2) / np.sqrt(2), np.ones(4) / 2.0)


class TestStateVector:
    def test_rejects_unnormalized(self):
        from cdforge.errors import ContractViolationError

        with pytest.raises(ContractViolationError):
            StateVector([1.0, 1.0], 1)

    def test_rejects_wrong_length(self):
        with pytest.raises(ConfigurationError):
            StateVector([1.0, 0.0, 0.0], 1)
