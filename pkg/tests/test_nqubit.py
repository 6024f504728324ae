import numpy as np
import pytest

from qbrach import nqubit
from qbrach.errors import DimensionError, ValidationError
from qbrach.qalg import SIGMA_X, matrix_exp_i

DOWN = np.diag([0.0, 1.0])
UP = np.diag([1.0, 0.0])


class TestHamiltonian:
    def test_single_qubit(self):
        np.testing.assert_allclose(nqubit.optimal_hamiltonian(nqubit.NQubitConfig(1, 0.7)), 0.7 * SIGMA_X)

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_normalization(self, n):
        h = nqubit.optimal_hamiltonian(nqubit.NQubitConfig(n, 1.3))
        assert np.trace(h @ h).real / 2**n == pytest.approx(1.3**2, rel=1e-14)
        np.testing.assert_allclose(h, h.conj().T)

    @pytest.mark.parametrize("m", [1, 2, 4, 8])
    def test_trivial_extension(self, m):
        h = nqubit.optimal_hamiltonian(nqubit.NQubitConfig(2))
        assert nqubit.trivial_extension_norm(h, m) == np.trace(h @ h).real / 4

    def test_dense_limit(self):
        with pytest.raises(DimensionError):
            nqubit.optimal_hamiltonian(nqubit.NQubitConfig(6))


class TestUnitary:
    def test_identity_at_zero(self):
        np.testing.assert_allclose(nqubit.evolve_unitary(nqubit.NQubitConfig(3), 0.0).to_dense(), np.eye(8))

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_swap_at_optimal_time(self, n):
        cfg = nqubit.NQubitConfig(n)
        u = nqubit.evolve_unitary(cfg, nqubit.optimal_time(cfg)).to_dense()
        assert u[cfg.partner, 0] == pytest.approx(-1j, abs=1e-15)
        assert u[0, cfg.partner] == pytest.approx(-1j, abs=1e-15)

    def test_matches_dense_exponential(self, rng):
        cfg = nqubit.NQubitConfig(3, 0.9)
        for t in rng.uniform(0, 3, size=5):
            dense = matrix_exp_i(nqubit.optimal_hamiltonian(cfg), t)
            np.testing.assert_allclose(nqubit.evolve_unitary(cfg, t).to_dense(), dense, atol=1e-12)

    def test_apply_matches_dense(self, rng):
        cfg = nqubit.NQubitConfig(4)
        u = nqubit.evolve_unitary(cfg, 0.37)
        v = rng.normal(size=16) + 1j * rng.normal(size=16)
        np.testing.assert_allclose(u.apply(v), u.to_dense() @ v, atol=1e-14)


class TestReducedState:
    def test_start(self):
        np.testing.assert_allclose(nqubit.reduced_state(nqubit.NQubitConfig(3), 0.0), UP, atol=1e-15)

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 8, 12])
    def test_arrival(self, n):
        cfg = nqubit.NQubitConfig(n)
        np.testing.assert_allclose(nqubit.reduced_state(cfg, nqubit.optimal_time(cfg)), DOWN, atol=1e-12)

    def test_single_qubit_rabi_flip(self):
        cfg = nqubit.NQubitConfig(1, 2.0)
        assert nqubit.optimal_time(cfg) == pytest.approx(np.pi / 4)
        t = 0.3
        psi = np.array([np.cos(2 * t), -1j * np.sin(2 * t)])
        np.testing.assert_allclose(nqubit.reduced_state(cfg, t), np.outer(psi, psi.conj()), atol=1e-15)

    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_dense_path_agrees(self, n):
        cfg = nqubit.NQubitConfig(n)
        for t in (0.1, 0.5, 1.1):
            np.testing.assert_allclose(nqubit.reduced_state(cfg, t, dense=True), nqubit.reduced_state(cfg, t),
                                       atol=1e-12)
            np.testing.assert_allclose(nqubit.reduced_state(cfg, t), nqubit.closed_form_state(cfg, t), atol=1e-12)


class TestTimes:
    def test_values(self):
        assert nqubit.optimal_time(nqubit.NQubitConfig(1)) == pytest.approx(np.pi / 2, abs=1e-15)
        assert nqubit.optimal_time(nqubit.NQubitConfig(3)) == pytest.approx(np.pi / 4, abs=1e-15)

    @pytest.mark.parametrize("n", range(1, 11))
    def test_halving(self, n):
        ratio = nqubit.optimal_time(nqubit.NQubitConfig(n + 2)) / nqubit.optimal_time(nqubit.NQubitConfig(n))
        assert ratio == 0.5

    def test_fidelity_curve(self):
        cfg = nqubit.NQubitConfig(2)
        t_opt = nqubit.optimal_time(cfg)
        curve = nqubit.fidelity_curve(cfg, [0.0, t_opt / 2, t_opt])
        np.testing.assert_allclose(curve[:, 0], [0.0, t_opt / 2, t_opt])
        np.testing.assert_allclose(curve[:, 1], [0.0, 0.5, 1.0], atol=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_fidelity_reaches_one_at_optimal_time(self, n):
        cfg = nqubit.NQubitConfig(n)
        assert abs(nqubit.first_arrival_time(cfg, 1.0 - 1e-15) - nqubit.optimal_time(cfg)) < 1e-6

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_threshold_crossing_is_quadratic_approach(self, n):
        cfg = nqubit.NQubitConfig(n)
        g = cfg.coupling
        t_cross = nqubit.first_arrival_time(cfg, 1 - 1e-9)
        expected = nqubit.optimal_time(cfg) - np.arcsin(np.sqrt(1e-9)) / g
        assert t_cross == pytest.approx(expected, abs=1e-9)

    def test_never_reached(self):
        assert np.isnan(nqubit.first_arrival_time(nqubit.NQubitConfig(1), 0.5, t_grid=np.linspace(0, 0.1, 5)))


def test_config_limits():
    with pytest.raises(DimensionError):
        nqubit.NQubitConfig(13)
    with pytest.raises(ValidationError):
        nqubit.NQubitConfig(0)
    with pytest.raises(ValidationError):
        nqubit.NQubitConfig(2, omega=-1.0)
