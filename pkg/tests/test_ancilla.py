import logging

import numpy as np
import pytest

from qbrach import ancilla
from qbrach import brachistochrone as bc
from qbrach import lindblad as lb
from qbrach.errors import ValidationError
from qbrach.qalg import PAULI, SIGMA_Z


def test_flip_flop_special_case():
    c, b = ancilla.special_case_build(1.0, 0.0, 0.3)
    h = ancilla.hab_build(c)
    np.testing.assert_allclose(h, np.kron(PAULI[0], PAULI[1]) + np.kron(PAULI[1], PAULI[0]))
    np.testing.assert_array_equal(ancilla.hab_build(np.zeros((3, 3))), np.zeros((4, 4)))


def test_match_special_case():
    c, b = ancilla.special_case_build(0.7, 0.2, -0.5)
    assert ancilla.match_special_case(c, b) == (0.7, 0.2, -0.5)
    assert ancilla.match_special_case(np.eye(3), b) is None


class TestMicroStep:
    def test_zero_duration(self, rng):
        rho = bc.density_from_bloch([0.2, -0.1, 0.4])
        c = rng.normal(size=(3, 3))
        np.testing.assert_allclose(ancilla.micro_step(rho, c, (0, 0, 0.5), 0.0), rho, atol=1e-15)

    def test_trace_and_positivity(self, rng):
        for _ in range(50):
            r = rng.normal(size=3)
            r *= rng.uniform(0, 1) / np.linalg.norm(r)
            b = rng.normal(size=3)
            b *= rng.uniform(0, 1) / np.linalg.norm(b)
            out = ancilla.micro_step(bc.density_from_bloch(r), rng.normal(size=(3, 3)), b, rng.uniform(0, 1))
            assert abs(np.trace(out) - 1) < 1e-14
            assert np.linalg.eigvalsh(out).min() > -1e-12

    def test_exact_cooling_factor(self):
        p, tau = 1.3, 0.05
        c, b = ancilla.special_case_build(p, 0.4, 1.0)
        r = np.array([0.0, 0.0, 0.3])
        out = bc.bloch_from_density(ancilla.micro_step(bc.density_from_bloch(r), c, b, tau))
        assert out[2] + 1 == pytest.approx((r[2] + 1) * np.cos(2 * p * tau) ** 2, rel=1e-13)

    def test_expansion_order(self, rng):
        c = rng.normal(size=(3, 3))
        b = np.array([0.3, -0.2, 0.5])
        rho = bc.density_from_bloch([0.1, 0.2, -0.3])

        def defect(tau):
            return np.linalg.norm(ancilla.micro_step(rho, c, b, tau) - ancilla.expansion_step(rho, c, b, tau))

        order = np.log2(defect(4e-4) / defect(2e-4))
        assert 2.8 <= order <= 3.2


class TestEffectiveHamiltonian:
    def test_special_case(self):
        c, b = ancilla.special_case_build(0.9, 0.6, 0.5)
        np.testing.assert_allclose(ancilla.effective_hamiltonian(c, b), 0.6 * 0.5 * SIGMA_Z)

    def test_no_polarization(self, rng):
        np.testing.assert_array_equal(ancilla.effective_hamiltonian(rng.normal(size=(3, 3)), np.zeros(3)),
                                      np.zeros((2, 2)))


class TestLindbladMatrix:
    def test_special_case_entries(self):
        p, q, b = 1.1, 0.4, 0.6
        a = ancilla.lindblad_matrix(*ancilla.special_case_build(p, q, b))
        expected = np.array([[p**2, 1j * b * p**2, 0], [-1j * b * p**2, p**2, 0], [0, 0, q**2]])
        np.testing.assert_allclose(a, expected, atol=1e-15)

    def test_unpolarized(self, rng):
        c = rng.normal(size=(3, 3))
        a = ancilla.lindblad_matrix(c, np.zeros(3))
        np.testing.assert_allclose(a, c @ c.T)
        assert np.all(a.imag == 0)

    def test_positive_semidefinite(self, rng):
        for _ in range(20):
            b = rng.normal(size=3)
            b /= np.linalg.norm(b)
            a = ancilla.lindblad_matrix(rng.normal(size=(3, 3)), b)
            assert np.linalg.eigvalsh(a).min() > -1e-12


class TestInducedLindblad:
    def test_reproduces_dissipator(self, rng):
        c = rng.normal(size=(3, 3))
        b = np.array([0.1, 0.4, -0.6])
        tau = 0.3
        a = ancilla.lindblad_matrix(c, b)
        ops, alphas, _ = ancilla.induced_lindblad(a, tau)
        assert np.all(alphas >= 0)
        rho = bc.density_from_bloch([0.3, 0.1, 0.2])
        direct = np.zeros((2, 2), dtype=complex)
        for j in range(3):
            for k in range(3):
                direct += a[j, k] * (PAULI[j] @ rho @ PAULI[k]
                                     - 0.5 * (PAULI[k] @ PAULI[j] @ rho + rho @ PAULI[k] @ PAULI[j]))
        np.testing.assert_allclose(lb.dissipator(rho, ops), tau * direct, atol=1e-13)

    def test_clamps_round_off(self, caplog):
        a = np.diag([1.0, 0.5, -1e-13]).astype(complex)
        with caplog.at_level(logging.WARNING):
            _, alphas, _ = ancilla.induced_lindblad(a, 1.0)
        assert alphas[-1] == 0.0
        assert "clamping" in caplog.text

    def test_rejects_negative(self):
        with pytest.raises(ValidationError):
            ancilla.induced_lindblad(np.diag([1.0, -0.1, 0.0]).astype(complex), 1.0)


class TestCommutativity:
    def test_identity_commutes(self, rng):
        k = bc.k_matrix(rng.normal(size=3), rng.normal(size=3))
        assert ancilla.commutativity_check(np.eye(3), k) == (0.0, 0.0)

    def test_generic_pair(self, rng):
        a = ancilla.lindblad_matrix(rng.normal(size=(3, 3)), (0.2, 0.3, 0.1))
        k = bc.k_matrix(rng.normal(size=3), rng.normal(size=3))
        comm = a @ k - k @ a
        herm, anti = ancilla.commutativity_check(a, k)
        assert herm > 0 and anti > 0
        assert np.hypot(herm, anti) == pytest.approx(np.linalg.norm(comm))


class TestClosedForms:
    def test_gammas(self):
        tau = 1e-2
        gp, gm, g0 = ancilla.gammas_from_special(2.0, 3.0, 1.0, tau)
        assert gp == 0.0
        assert gm == pytest.approx(np.sqrt(2 * tau) * 2)
        assert g0 == pytest.approx(np.sqrt(tau) * 3)
        gp, gm, _ = ancilla.gammas_from_special(2.0, 3.0, 0.0, tau)
        assert gp == gm == pytest.approx(np.sqrt(tau) * 2)
        assert ancilla.gammas_from_special(0.0, 0.0, 0.5, tau) == (0.0, 0.0, 0.0)
        with pytest.raises(ValidationError):
            ancilla.gammas_from_special(1.0, 0.0, 1.5, tau)

    def test_damping(self):
        p, tau = 2.0, 0.01
        t = np.linspace(0, 10, 11)
        np.testing.assert_allclose(ancilla.damping_solution(t, 0.0, 1.0, p, tau), -1 + np.exp(-4 * p**2 * tau * t))
        np.testing.assert_allclose(ancilla.damping_solution(t, 0.4, 0.0, p, tau), 0.4 * np.exp(-4 * p**2 * tau * t))
        assert ancilla.damping_solution(0.0, 0.3, 0.7, p, tau) == 0.3

    def test_rates_match_parallel_closed_form(self):
        # the induced magnitudes are rates per unit time, so both closed forms agree in t
        p, b, tau = 1.0, 0.5, 1e-2
        gp, gm, _ = ancilla.gammas_from_special(p, 0.0, b, tau)
        t = np.linspace(0, 5, 6)
        lhs = bc.parallel_case_solution(t, 0.2, (gp, gm))
        np.testing.assert_allclose(lhs, -b + (0.2 + b) * np.exp(-4 * p**2 * tau * t), atol=1e-12)


class TestRunMicro:
    def test_deviation_small_and_first_order_bound(self):
        p, tau = 1.0, 1e-3
        c, b = ancilla.special_case_build(p, 0.0, 1.0)
        rec = ancilla.run_micro(ancilla.MicroConfig(tau, 5000, c, b), (0.0, 0.0, 1.0))
        assert rec.diagnostics["damping_max_deviation"] < tau
        assert rec.diagnostics["damping_max_deviation"] == pytest.approx(
            np.max(ancilla.damping_deviation(rec, p, 1.0, tau)))

    def test_q_does_not_matter(self):
        recs = [ancilla.run_micro(ancilla.MicroConfig(1e-2, 200, *ancilla.special_case_build(1.0, q, 1.0)),
                                  (0.0, 0.0, 0.5)) for q in (0.0, 0.8)]
        assert np.max(np.abs(recs[0].r - recs[1].r)) < 1e-12

    def test_cooling_from_mixed(self):
        c, b = ancilla.special_case_build(5.0, 0.0, 1.0)
        rec = ancilla.run_micro(ancilla.MicroConfig(1e-2, 1000, c, b), (0.0, 0.0, 0.0))
        assert np.all(np.diff(rec.fidelity) > 0)
        assert rec.fidelity[-1] > 0.9999
        np.testing.assert_allclose(rec.fidelity, (1 - rec.r[:, 2]) / 2, atol=1e-15)

    def test_zero_couplings(self):
        r0 = (0.1, -0.2, 0.3)
        rec = ancilla.run_micro(ancilla.MicroConfig(1e-2, 50, np.zeros((3, 3)), (0, 0, 1)), r0)
        np.testing.assert_allclose(rec.r, np.tile(r0, (51, 1)), atol=1e-15)

    def test_time_dependent_couplings(self):
        c, b = ancilla.special_case_build(1.0, 0.0, 1.0)
        fixed = ancilla.run_micro(ancilla.MicroConfig(1e-2, 20, c, b), (0, 0, 1))
        varying = ancilla.run_micro(ancilla.MicroConfig(1e-2, 20, c, b, couplings_fn=lambda k: c), (0, 0, 1))
        np.testing.assert_allclose(varying.r, fixed.r, atol=1e-15)
        assert "damping_max_deviation" not in varying.diagnostics

    def test_markov_warning(self, caplog):
        with caplog.at_level(logging.WARNING):
            ancilla.MicroConfig(0.5, 1, *ancilla.special_case_build(1.0, 0.0, 1.0))
        assert "exceeds" in caplog.text

    @pytest.mark.parametrize("kw", [dict(tau=0.0), dict(steps=0), dict(b=(0, 0, 2)), dict(couplings=np.eye(2))])
    def test_rejects(self, kw):
        args = dict(tau=1e-2, steps=10, couplings=np.eye(3), b=(0, 0, 1))
        args.update(kw)
        with pytest.raises(ValidationError):
            ancilla.MicroConfig(**args)
