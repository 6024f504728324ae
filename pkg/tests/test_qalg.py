import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbrach import ancilla, nqubit
from qbrach.errors import DimensionError, NotHermitianError
from qbrach.qalg import (
    IDENTITY2, SIGMA_X, SIGMA_Y, SIGMA_Z, anticommutator, commutator, from_interleaved, hermitian_eig,
    matrix_exp_i, partial_trace, pauli_coefficients, pauli_matrix, tensor_product, to_interleaved,
)


def rand_herm(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


def rand_c(rng, n):
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))


class TestCommutators:
    def test_pauli_commutator(self):
        np.testing.assert_allclose(commutator(SIGMA_X, SIGMA_Y), 2j * SIGMA_Z)

    def test_self_commutator_vanishes(self, rng):
        a = rand_c(rng, 3)
        assert np.all(commutator(a, a) == 0)

    def test_commutator_of_hermitians_is_antihermitian(self, rng):
        a, b = rand_herm(rng, 2), rand_herm(rng, 2)
        x = commutator(a, b)
        oracle = np.array([[sum(a[i, k] * b[k, j] - b[i, k] * a[k, j] for k in range(2)) for j in range(2)]
                           for i in range(2)])
        np.testing.assert_allclose(x, oracle, atol=1e-14)
        np.testing.assert_allclose(x.conj().T, -x, atol=1e-14)

    def test_anticommutators(self, rng):
        np.testing.assert_allclose(anticommutator(SIGMA_X, SIGMA_X), 2 * IDENTITY2)
        np.testing.assert_allclose(anticommutator(SIGMA_X, SIGMA_Y), 0 * IDENTITY2)
        a, b = rand_herm(rng, 3), rand_herm(rng, 3)
        x = anticommutator(a, b)
        np.testing.assert_allclose(x, x.conj().T, atol=1e-14)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            commutator(np.eye(2), np.eye(3))
        with pytest.raises(DimensionError):
            anticommutator(np.eye(2), np.ones((2, 3)))


class TestTensorAndPartialTrace:
    def test_identities(self):
        np.testing.assert_array_equal(tensor_product(IDENTITY2, IDENTITY2), np.eye(4))
        np.testing.assert_array_equal(tensor_product(SIGMA_Z, SIGMA_Z), np.diag([1, -1, -1, 1]))

    def test_flip_flop_coupling_entries(self):
        m = tensor_product(SIGMA_X, SIGMA_Y) + tensor_product(SIGMA_Y, SIGMA_X)
        expected = np.zeros((4, 4), dtype=complex)
        expected[0, 3] = -2j
        expected[3, 0] = 2j
        np.testing.assert_allclose(m, expected)
        c, _ = ancilla.special_case_build(1.0, 0.0, 0.0)
        np.testing.assert_allclose(ancilla.hab_build(c), expected)

    def test_product_state_reduction(self, rng):
        a = rand_herm(rng, 2) + 3 * np.eye(2)
        b = rand_herm(rng, 3) + 4 * np.eye(3)
        a, b = a / np.trace(a), b / np.trace(b)
        np.testing.assert_allclose(partial_trace(np.kron(a, b), (2, 3), keep=0), a, atol=1e-15)
        np.testing.assert_allclose(partial_trace(np.kron(a, b), (2, 3), keep=1), b, atol=1e-15)

    def test_bell_state(self):
        psi = np.array([1, 0, 0, 1]) / np.sqrt(2)
        np.testing.assert_allclose(partial_trace(np.outer(psi, psi), (2, 2)), np.eye(2) / 2)

    def test_closed_model_reduction(self):
        cfg = nqubit.NQubitConfig(2, 1.0)
        t = np.pi / (4 * np.sqrt(2))
        u = matrix_exp_i(nqubit.optimal_hamiltonian(cfg), t)
        rho0 = np.zeros((4, 4))
        rho0[0, 0] = 1
        red = partial_trace(u @ rho0 @ u.conj().T, (2, 2))
        x = 2 * np.sqrt(2) * t
        wave = 0.5 * (np.eye(2) + np.cos(x) * SIGMA_Z + 1j * np.sin(x) * np.array([[0, 1], [-1, 0]]))
        np.testing.assert_allclose(red, wave, atol=1e-12)

    def test_inconsistent_dims(self):
        with pytest.raises(DimensionError):
            partial_trace(np.eye(4), (3, 2))
        with pytest.raises(DimensionError):
            partial_trace(np.eye(4), (2, 2), keep=2)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**31 - 1))
    def test_trace_preserving_and_linear(self, da, db, seed):
        rng = np.random.default_rng(seed)
        m1, m2 = rand_c(rng, da * db), rand_c(rng, da * db)
        for keep in (0, 1):
            pt = partial_trace(m1, (da, db), keep)
            assert abs(np.trace(pt) - np.trace(m1)) < 1e-12
            lin = partial_trace(2 * m1 - 1j * m2, (da, db), keep)
            np.testing.assert_allclose(lin, 2 * pt - 1j * partial_trace(m2, (da, db), keep), atol=1e-12)


class TestHermitianEig:
    def test_pauli_z(self):
        e = hermitian_eig(SIGMA_Z)
        np.testing.assert_allclose(e.eigenvalues, [1, -1])
        assert abs(abs(e.eigenvectors[0, 0]) - 1) < 1e-15
        assert abs(abs(e.eigenvectors[1, 1]) - 1) < 1e-15

    def test_parallel_k_matrix(self):
        s, r = 0.5, 0.8
        k = 2 * s * np.array([[0, -1j, 0], [1j, 0, 0], [0, 0, r]])
        np.testing.assert_allclose(hermitian_eig(k).eigenvalues, [1, 0.8, -1], atol=1e-14)

    def test_lindblad_matrix_eigenvalues(self):
        p, b, q = 1.0, 0.5, 0.0
        a = np.array([[p**2, 1j * b * p**2, 0], [-1j * b * p**2, p**2, 0], [0, 0, q**2]])
        np.testing.assert_allclose(hermitian_eig(a).eigenvalues, [1.5, 0.5, 0.0], atol=1e-14)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitianError):
            hermitian_eig(np.array([[0, 1], [0, 0]]))

    def test_records_symmetrization(self):
        a = SIGMA_X + np.array([[0, 1e-12], [0, 0]])
        e = hermitian_eig(a)
        assert 0 < e.correction < 1e-11

    @pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 16, 32])
    def test_reconstruction_and_orthonormality(self, rng, n):
        a = rand_herm(rng, n)
        e = hermitian_eig(a)
        v, w = e.eigenvectors, e.eigenvalues
        assert np.linalg.norm(v @ np.diag(w) @ v.conj().T - a) / np.linalg.norm(a) < 1e-12
        assert np.max(np.abs(v.conj().T @ v - np.eye(n))) < 1e-12
        assert np.all(np.diff(w) <= 0)

    def test_degenerate_spectrum(self):
        a = np.diag([2.0, 2.0, -1.0, 2.0]).astype(complex)
        e = hermitian_eig(a)
        np.testing.assert_allclose(e.eigenvalues, [2, 2, 2, -1])

    def test_deterministic(self, rng):
        a = rand_herm(rng, 6)
        e1, e2 = hermitian_eig(a), hermitian_eig(a.copy())
        assert e1.eigenvalues.tobytes() == e2.eigenvalues.tobytes()
        assert e1.eigenvectors.tobytes() == e2.eigenvectors.tobytes()

    def test_dimension_cap(self):
        with pytest.raises(DimensionError):
            hermitian_eig(np.eye(33))


class TestMatrixExp:
    def test_zero(self):
        np.testing.assert_allclose(matrix_exp_i(np.zeros((3, 3)), 1.3), np.eye(3))

    def test_pauli_rotation(self):
        np.testing.assert_allclose(matrix_exp_i(SIGMA_X, np.pi / 2), -1j * SIGMA_X, atol=1e-15)

    def test_unitary(self, rng):
        for n in (2, 4, 8):
            u = matrix_exp_i(rand_herm(rng, n), rng.normal())
            assert np.max(np.abs(u.conj().T @ u - np.eye(n))) < 1e-12

    def test_two_level_pattern(self):
        cfg = nqubit.NQubitConfig(2, 1.0)
        t = 0.3
        u = matrix_exp_i(nqubit.optimal_hamiltonian(cfg), t)
        c, s = np.cos(np.sqrt(2) * t), np.sin(np.sqrt(2) * t)
        expected = np.eye(4, dtype=complex)
        expected[0, 0] = expected[2, 2] = c
        expected[0, 2] = expected[2, 0] = -1j * s
        np.testing.assert_allclose(u, expected, atol=1e-14)

    def test_non_hermitian(self):
        with pytest.raises(NotHermitianError):
            matrix_exp_i(np.array([[0, 1], [2, 0]]), 1.0)


def test_trace_cyclicity(rng):
    for _ in range(100):
        n = int(rng.integers(1, 9))
        a, b = rand_c(rng, n), rand_c(rng, n)
        assert abs(np.trace(a @ b) - np.trace(b @ a)) < 1e-12


def test_pauli_round_trip(rng):
    v = rng.normal(size=3) + 1j * rng.normal(size=3)
    np.testing.assert_allclose(pauli_coefficients(pauli_matrix(v)), v, atol=1e-15)


def test_interleaved_layout(rng):
    m = np.array([[1 + 2j, 3 + 4j], [5 + 6j, 7 + 8j]])
    np.testing.assert_array_equal(to_interleaved(m), [1, 2, 3, 4, 5, 6, 7, 8])
    a = rand_c(rng, 3)
    assert np.array_equal(from_interleaved(to_interleaved(a), 3), a)
    with pytest.raises(DimensionError):
        from_interleaved([1.0, 2.0], 2)
