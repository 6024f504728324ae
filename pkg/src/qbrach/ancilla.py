"""Two-qubit collision model: a system qubit repeatedly coupled to a fresh ancilla.

Each step applies ``exp(-i H_AB tau)`` to ``rho (x) rho_B`` and traces out the
ancilla, where ``H_AB = sum_jk h_jk sigma_j (x) sigma_k`` and
``rho_B = (1 + b.sigma)/2`` is re-prepared every step. To second order in
``tau`` this is a Lindblad step with effective Hamiltonian
``H = sum_jk h_jk b_k sigma_j`` and Lindblad matrix

    a_jk = sum_lm h_jl h_km (delta_lm - i eps_lmn b_n).
"""

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .brachistochrone import bloch_fidelity, bloch_from_density, density_from_bloch
from .errors import ValidationError
from .qalg import PAULI, anticommutator, as_matrix, commutator, hermitian_eig, matrix_exp_i, partial_trace
from .trajectory import TrajectoryRecord

logger = logging.getLogger(__name__)

MARKOV_WARNING = 0.1
NEGATIVE_EIG_TOL = 1e-10

_EPS = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    _EPS[_i, _j, _k] = 1.0
    _EPS[_j, _i, _k] = -1.0


def _couplings(c) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if c.shape != (3, 3) or not np.all(np.isfinite(c)):
        raise ValidationError("couplings must be a finite real 3x3 matrix")
    return c


def _ancilla(b) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    if b.shape != (3,) or not np.all(np.isfinite(b)):
        raise ValidationError("ancilla Bloch vector must be a finite 3-vector")
    if np.linalg.norm(b) > 1 + 1e-12:
        raise ValidationError("ancilla Bloch vector must satisfy |b| <= 1")
    return b


def special_case_build(p: float, q: float, b: float):
    """Couplings ``[[0,p,0],[p,0,0],[0,0,q]]`` and ancilla ``b e_z``."""
    c = np.array([[0.0, p, 0.0], [p, 0.0, 0.0], [0.0, 0.0, q]])
    return c, _ancilla(np.array([0.0, 0.0, b]))


def match_special_case(c, b):
    """Return ``(p, q, b_z)`` if ``(c, b)`` has the special form, else ``None``."""
    c = _couplings(c)
    b = _ancilla(b)
    p, q = c[0, 1], c[2, 2]
    ref, _ = special_case_build(p, q, 0.0)
    if np.array_equal(c, ref) and b[0] == 0.0 and b[1] == 0.0:
        return float(p), float(q), float(b[2])
    return None


def hab_build(c) -> np.ndarray:
    """``H_AB = sum_jk h_jk sigma_j (x) sigma_k`` (system first)."""
    c = _couplings(c)
    out = np.zeros((4, 4), dtype=complex)
    for j in range(3):
        for k in range(3):
            if c[j, k] != 0.0:
                out += c[j, k] * np.kron(PAULI[j], PAULI[k])
    return out


def micro_step(rho, c, b, tau: float) -> np.ndarray:
    """One exact collision: ``Tr_B[U (rho (x) rho_B) U^+]`` with ``U = exp(-i H_AB tau)``."""
    rho = as_matrix(rho, "rho")
    u = matrix_exp_i(hab_build(c), tau)
    joint = np.kron(rho, density_from_bloch(_ancilla(b)))
    out = partial_trace(u @ joint @ u.conj().T, (2, 2), keep=0)
    return 0.5 * (out + out.conj().T)


def effective_hamiltonian(c, b) -> np.ndarray:
    """``H = sum_jk h_jk b_k sigma_j``."""
    v = _couplings(c) @ _ancilla(b)
    return sum(v[j] * PAULI[j] for j in range(3))


def lindblad_matrix(c, b) -> np.ndarray:
    """``a_jk = sum_lm h_jl h_km (delta_lm - i sum_n eps_lmn b_n)``."""
    c = _couplings(c)
    b = _ancilla(b)
    m = np.eye(3) - 1j * np.einsum("lmn,n->lm", _EPS, b)
    return c @ m @ c.T


def expansion_step(rho, c, b, tau: float) -> np.ndarray:
    """Second-order expansion of :func:`micro_step` in ``tau``."""
    rho = as_matrix(rho, "rho")
    h = effective_hamiltonian(c, b)
    a = lindblad_matrix(c, b)
    diss = np.zeros((2, 2), dtype=complex)
    for j in range(3):
        for k in range(3):
            if a[j, k] != 0:
                diss += a[j, k] * (PAULI[j] @ rho @ PAULI[k] - 0.5 * anticommutator(PAULI[k] @ PAULI[j], rho))
    return rho - 1j * tau * commutator(h, rho) + tau**2 * diss


def induced_lindblad(a, tau: float):
    """Lindblad operators generated by ``a`` over one step of length ``tau``.

    Diagonalizing ``a = V diag(alpha) V^+`` gives
    ``L_a = sqrt(tau alpha_a) sum_j V_ja sigma_j``; the collision step is then
    a Lindblad step of duration ``tau`` with these operators.
    Returns ``(ops, alphas, V)``.
    """
    eig = hermitian_eig(a)
    alphas = eig.eigenvalues.copy()
    if alphas[-1] < -NEGATIVE_EIG_TOL:
        raise ValidationError(f"Lindblad matrix is not positive semidefinite (eigenvalue {alphas[-1]:.3e})")
    if np.any(alphas < 0):
        logger.warning("clamping small negative Lindblad-matrix eigenvalues %s to zero", alphas[alphas < 0])
        alphas = np.maximum(alphas, 0.0)
    v = eig.eigenvectors
    ops = [np.sqrt(tau * alphas[a]) * sum(v[j, a] * PAULI[j] for j in range(3)) for a in range(3)]
    return ops, alphas, v


def commutativity_check(a, kmat):
    """Frobenius norms of the Hermitian and anti-Hermitian parts of ``[a, K]``."""
    comm = commutator(a, kmat)
    herm = 0.5 * (comm + comm.conj().T)
    anti = 0.5 * (comm - comm.conj().T)
    return float(np.linalg.norm(herm)), float(np.linalg.norm(anti))


def gammas_from_special(p: float, q: float, b: float, tau: float):
    """``(gamma_+, gamma_-, gamma_0)`` with ``gamma_+-^2 = (1 -+ b) tau p^2``, ``gamma_0^2 = tau q^2``."""
    if not tau > 0:
        raise ValidationError("tau must be positive")
    if abs(b) > 1:
        raise ValidationError("|b| must not exceed 1")
    return (float(np.sqrt((1 - b) * tau) * abs(p)),
            float(np.sqrt((1 + b) * tau) * abs(p)),
            float(np.sqrt(tau) * abs(q)))


def damping_solution(t, r0: float, b: float, p: float, tau: float):
    """``r_z(t) = -b + (r0 + b) exp(-4 p^2 tau t)``."""
    x = -4 * p**2 * tau * np.asarray(t, dtype=float)
    return r0 * np.exp(x) + b * np.expm1(x)


@dataclass
class MicroConfig:
    """Collision-model run parameters.

    ``couplings_fn(k)``, if given, returns the couplings for step ``k`` and
    overrides ``couplings``.
    """

    tau: float
    steps: int
    couplings: np.ndarray
    b: np.ndarray
    couplings_fn: Callable[[int], np.ndarray] | None = None

    def __post_init__(self):
        self.couplings = _couplings(self.couplings)
        self.b = _ancilla(self.b)
        if not (np.isfinite(self.tau) and self.tau > 0):
            raise ValidationError("tau must be positive")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValidationError("steps must be a positive integer")
        self.steps = int(self.steps)
        scale = self.tau * np.linalg.norm(self.couplings, 2)
        if scale > MARKOV_WARNING:
            logger.warning("tau*||h|| = %.3g exceeds %.2g; the short-time expansion is not accurate",
                           scale, MARKOV_WARNING)


def run_micro(cfg: MicroConfig, r0) -> TrajectoryRecord:
    """Iterate :func:`micro_step` and record ``r(k tau)``, ``k = 0..steps``."""
    r0 = np.asarray(r0, dtype=float)
    if r0.shape != (3,) or np.linalg.norm(r0) > 1 + 1e-12:
        raise ValidationError("r0 must be a 3-vector with |r0| <= 1")
    rs = np.empty((cfg.steps + 1, 3))
    rs[0] = r0
    rho = density_from_bloch(r0)
    u = None
    rho_b = density_from_bloch(cfg.b)
    for k in range(cfg.steps):
        if cfg.couplings_fn is not None:
            u = matrix_exp_i(hab_build(cfg.couplings_fn(k)), cfg.tau)
        elif u is None:
            u = matrix_exp_i(hab_build(cfg.couplings), cfg.tau)
        joint = u @ np.kron(rho, rho_b) @ u.conj().T
        rho = partial_trace(joint, (2, 2), keep=0)
        rho = 0.5 * (rho + rho.conj().T)
        rs[k + 1] = bloch_from_density(rho)
    t = np.arange(cfg.steps + 1) * cfg.tau
    rec = TrajectoryRecord(t=t, r=rs, spacing=cfg.tau, fidelity=bloch_fidelity(rs, (0.0, 0.0, -1.0)))
    special = match_special_case(cfg.couplings, cfg.b) if cfg.couplings_fn is None else None
    if special is not None:
        p, _, bz = special
        dev = damping_deviation(rec, p, bz, cfg.tau)
        rec.diagnostics["damping_max_deviation"] = float(np.max(dev))
    return rec


def damping_deviation(rec: TrajectoryRecord, p: float, b: float, tau: float) -> np.ndarray:
    """``|r_z(k tau) - damping_solution|`` along a special-case run.

    Only meaningful when the run starts on the z axis.
    """
    return np.abs(rec.r[:, 2] - damping_solution(rec.t, rec.r[0, 2], b, p, tau))
