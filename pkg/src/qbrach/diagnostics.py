"""Randomized invariant suites used by ``qbrach check`` and the tests."""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import ancilla, brachistochrone as bc, lindblad as lb
from .qalg import PAULI, dagger, pauli_matrix


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    measured: str
    tolerance: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name:<26} measured={self.measured} tolerance={self.tolerance}"


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + dagger(a)) / 2


def random_complex(rng, n):
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))


def random_density(rng, n, floor: float = 0.05):
    """Full-rank random state (minimum eigenvalue bounded away from zero)."""
    a = random_complex(rng, n)
    rho = a @ dagger(a) + floor * n * np.eye(n)
    return rho / np.trace(rho).real


def _random_generator(rng, n, n_ops=2):
    return random_hermitian(rng, n), [random_complex(rng, n) for _ in range(n_ops)]


def _fmt(x: float) -> str:
    return f"{x:.3e}"


def duality_suite(rng, trials: int = 100, tol: float = 1e-12,
                  generator: Callable = lb.adjoint_generator) -> SuiteResult:
    worst = 0.0
    for dim in (2, 4):
        for _ in range(trials):
            h, ls = _random_generator(rng, dim)
            a = random_hermitian(rng, dim)
            b = random_hermitian(rng, dim)
            lhs = np.trace(a @ lb.lindblad_rhs(b, h, ls))
            rhs = np.trace(generator(a, h, ls) @ b)
            worst = max(worst, abs(lhs - rhs))
    return SuiteResult("duality", worst < tol, _fmt(worst), _fmt(tol))


def trace_suite(rng, trials: int = 100, tol: float = 1e-12) -> SuiteResult:
    worst = 0.0
    for dim in (2, 4):
        for _ in range(trials):
            h, ls = _random_generator(rng, dim)
            rd = lb.lindblad_rhs(random_density(rng, dim), h, ls)
            worst = max(worst, abs(np.trace(rd)), float(np.max(np.abs(rd - dagger(rd)))))
    return SuiteResult("trace_hermiticity", worst < tol, _fmt(worst), _fmt(tol))


def gauge_suite(rng, trials: int = 100, tol: float = 1e-12) -> SuiteResult:
    worst = 0.0
    for dim in (2, 4):
        for _ in range(trials):
            h, ls = _random_generator(rng, dim)
            rho = random_density(rng, dim)
            u, _ = np.linalg.qr(random_complex(rng, len(ls)))
            g = lb.GaugeTransform(float(rng.normal()), tuple(rng.normal(size=len(ls)) + 1j * rng.normal(size=len(ls))), u)
            h2, l2 = lb.gauge_apply(h, ls, g)
            worst = max(worst, float(np.max(np.abs(lb.lindblad_rhs(rho, h2, l2) - lb.lindblad_rhs(rho, h, ls)))))
    return SuiteResult("gauge_invariance", worst < tol, _fmt(worst), _fmt(tol))


def on_shell_suite(rng, trials: int = 100, tol: float = 1e-9) -> SuiteResult:
    worst = 0.0
    for dim in (2, 4):
        for _ in range(trials):
            h, ls = _random_generator(rng, dim)
            rho = random_density(rng, dim)
            lt = lb.time_functional(rho, lb.lindblad_rhs(rho, h, ls), h, ls)
            worst = max(worst, abs(lt - 1.0))
    return SuiteResult("on_shell_time", worst <= tol, _fmt(worst), _fmt(tol))


def _orders(defect: Callable[[float], float], taus) -> list:
    d = [defect(t) for t in taus]
    return [float(np.log2(d[i] / d[i + 1])) for i in range(len(d) - 1)]


def kraus_order(rng, tau: float = 1e-3, trials: int = 10):
    """Measured orders of the Kraus-vs-Euler single-step defect in ``tau``."""
    orders = []
    for _ in range(trials):
        h, ls = _random_generator(rng, 2)
        rho = random_density(rng, 2)

        def defect(t):
            k = lb.kraus_from_lindblad(h, ls, t)
            return np.linalg.norm(lb.kraus_apply(rho, k) - rho - t * lb.lindblad_rhs(rho, h, ls))

        orders += _orders(defect, (tau, tau / 2, tau / 4))
    return orders


def micro_order(rng, tau: float = 4e-4, trials: int = 10):
    """Measured orders of the collision-step vs second-order-expansion defect."""
    orders = []
    for _ in range(trials):
        c = rng.normal(size=(3, 3))
        b = rng.normal(size=3)
        b *= rng.uniform(0.1, 1.0) / np.linalg.norm(b)
        rho = bc.density_from_bloch(rng.normal(size=3) * 0.3)

        def defect(t):
            return np.linalg.norm(ancilla.micro_step(rho, c, b, t) - ancilla.expansion_step(rho, c, b, t))

        orders += _orders(defect, (tau, tau / 2, tau / 4))
    return orders


def kraus_suite(rng, lo: float = 1.9, hi: float = 2.1) -> SuiteResult:
    o = kraus_order(rng)
    ok = lo <= min(o) and max(o) <= hi
    return SuiteResult("kraus_order", ok, f"[{min(o):.3f},{max(o):.3f}]", f"[{lo},{hi}]")


def micro_suite(rng, lo: float = 2.8, hi: float = 3.2) -> SuiteResult:
    o = micro_order(rng)
    ok = lo <= min(o) and max(o) <= hi
    return SuiteResult("micro_expansion_order", ok, f"[{min(o):.3f},{max(o):.3f}]", f"[{lo},{hi}]")


def vector_matrix_suite(rng, trials: int = 100, tol: float = 1e-12) -> SuiteResult:
    worst = 0.0
    for _ in range(trials):
        r = rng.normal(size=3)
        r *= rng.uniform(0, 1) / np.linalg.norm(r)
        s, h = rng.normal(size=3), rng.normal(size=3)
        ls = [rng.normal(size=3) + 1j * rng.normal(size=3) for _ in range(3)]
        hm = pauli_matrix(h.astype(complex))
        lm = [pauli_matrix(l) for l in ls]
        rd = lb.lindblad_rhs(bc.density_from_bloch(r), hm, lm)
        sd = lb.adjoint_rhs(bc.costate_matrix(s), hm, lm)
        rv = np.array([np.trace(rd @ p).real for p in PAULI])
        sv = np.array([np.trace(sd @ p).real / 2 for p in PAULI])
        worst = max(worst, float(np.max(np.abs(rv - bc.master_rhs_vec(r, h, ls)))),
                    float(np.max(np.abs(sv - bc.adjoint_rhs_vec(s, h, ls)))))
    return SuiteResult("vector_matrix", worst < tol, _fmt(worst), _fmt(tol))


def residual_of(record) -> float:
    """Optimality residual of a one-qubit optimal-control record."""
    rhos = [bc.density_from_bloch(r) for r in record.r]
    sigmas = [bc.costate_matrix(s) for s in record.s]
    hams = [pauli_matrix(h.astype(complex)) for h in record.h]
    return lb.brachistochrone_residual(rhos, sigmas, hams, record.spacing)


def residual_suite(rng, tol: float = 1e-4) -> SuiteResult:
    angle = float(rng.uniform(0.2, 2.8))
    cfg = bc.BrachConfig(t_max=1.0)
    r0 = (0.0, 0.0, 0.8)
    rec = bc.integrate(cfg, r0, bc.initial_costate(r0, angle))
    res = residual_of(rec)
    return SuiteResult("brachistochrone_residual", res < tol, _fmt(res), _fmt(tol))


def run_all(seed: int = 0, generator: Callable = lb.adjoint_generator) -> list:
    """Run every suite with one seeded generator, in a fixed order."""
    rng = np.random.default_rng(seed)
    return [
        duality_suite(rng, generator=generator),
        trace_suite(rng),
        gauge_suite(rng),
        on_shell_suite(rng),
        kraus_suite(rng),
        micro_suite(rng),
        vector_matrix_suite(rng),
        residual_suite(rng),
    ]
