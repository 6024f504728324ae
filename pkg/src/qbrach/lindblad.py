"""Lindblad master equation, its adjoint, gauge freedom, metric and Kraus map.

Conventions (hbar = 1)::

    drho/dt  = -i[H, rho] + sum_a (L_a rho L_a^+ - 1/2 {L_a^+ L_a, rho})
    L^+(A)   =  i[H, A]   + sum_a (L_a^+ A L_a - 1/2 {L_a^+ L_a, A})
    dsigma/dt = -traceless(L^+(sigma))

so that ``Tr[A L(B)] = Tr[L^+(A) B]``.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionError, ValidationError
from .qalg import anticommutator, as_matrix, commutator, dagger, hermitian_defect, hermitian_eig

logger = logging.getLogger(__name__)

TRACE_TOL = 1e-10
FULL_RANK_TOL = 1e-8


# ---------------------------------------------------------------------------
# containers and invariant checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LindbladSet:
    """Lindblad operators ``L_a``; ``gammas[a] = sqrt(Tr(L_a^+ L_a)/N)``."""

    ops: tuple

    def __init__(self, ops=()):
        mats = tuple(as_matrix(op, "Lindblad operator") for op in ops)
        if mats and any(m.shape != mats[0].shape for m in mats):
            raise DimensionError("Lindblad operators must share one dimension")
        object.__setattr__(self, "ops", mats)

    def __iter__(self):
        return iter(self.ops)

    def __len__(self):
        return len(self.ops)

    def __getitem__(self, i):
        return self.ops[i]

    @property
    def gram(self) -> np.ndarray:
        """``G_ab = Tr(L_a^+ L_b)``."""
        n = len(self.ops)
        g = np.zeros((n, n), dtype=complex)
        for a in range(n):
            for b in range(n):
                g[a, b] = np.trace(dagger(self.ops[a]) @ self.ops[b])
        return g

    @property
    def gammas(self) -> np.ndarray:
        if not self.ops:
            return np.zeros(0)
        n = self.ops[0].shape[0]
        return np.sqrt(np.maximum(np.real(np.diag(self.gram)), 0.0) / n)

    def check(self, trace_tol: float = TRACE_TOL, gram_tol: float = 1e-8) -> "LindbladSet":
        """Raise :class:`ValidationError` unless traceless and mutually orthogonal."""
        for a, op in enumerate(self.ops):
            if abs(np.trace(op)) > trace_tol:
                raise ValidationError(f"L_{a} is not traceless (trace {np.trace(op):.3e})")
        g = self.gram
        off = g - np.diag(np.diag(g))
        if off.size and np.max(np.abs(off)) > gram_tol:
            raise ValidationError("Lindblad operators are not mutually orthogonal")
        return self


def _ops(lind) -> tuple:
    if isinstance(lind, LindbladSet):
        return lind.ops
    return LindbladSet(lind).ops


def check_density(rho, tol: float = TRACE_TOL, psd_tol: float = 1e-9) -> np.ndarray:
    """Validate a density operator: Hermitian, unit trace, positive semidefinite."""
    rho = as_matrix(rho, "rho")
    if hermitian_defect(rho) > tol:
        raise ValidationError("density operator is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise ValidationError(f"density operator trace is {np.trace(rho).real!r}, expected 1")
    lam = hermitian_eig(rho).eigenvalues
    if lam[-1] < -psd_tol:
        raise ValidationError(f"density operator has negative eigenvalue {lam[-1]:.3e}")
    return rho


def check_hamiltonian(h, omega: float | None = None, tol: float = TRACE_TOL,
                      norm_tol: float = 1e-8) -> np.ndarray:
    """Hermitian, traceless and, if ``omega`` is given, ``Tr H^2 = N omega^2``."""
    h = as_matrix(h, "H")
    if hermitian_defect(h) > tol:
        raise ValidationError("Hamiltonian is not Hermitian")
    if abs(np.trace(h)) > tol:
        raise ValidationError("Hamiltonian is not traceless")
    if omega is not None:
        n = h.shape[0]
        if abs(np.trace(h @ h).real - n * omega**2) > norm_tol:
            raise ValidationError("Hamiltonian violates the normalization Tr H^2 = N omega^2")
    return h


def check_costate(sigma, tol: float = TRACE_TOL) -> np.ndarray:
    sigma = as_matrix(sigma, "costate")
    if hermitian_defect(sigma) > tol:
        raise ValidationError("costate is not Hermitian")
    if abs(np.trace(sigma)) > tol:
        raise ValidationError("costate is not traceless")
    return sigma


# ---------------------------------------------------------------------------
# dynamics
# ---------------------------------------------------------------------------


def _check_dims(mat, h, ops):
    n = mat.shape[0]
    if h.shape[0] != n or any(op.shape[0] != n for op in ops):
        raise DimensionError("state, Hamiltonian and Lindblad operators differ in dimension")


def dissipator(rho, lind) -> np.ndarray:
    rho = as_matrix(rho, "rho")
    out = np.zeros_like(rho)
    for op in _ops(lind):
        ld = dagger(op)
        out += op @ rho @ ld - 0.5 * anticommutator(ld @ op, rho)
    return out


def lindblad_rhs(rho, h, lind=()) -> np.ndarray:
    """Right-hand side of the master equation."""
    rho = as_matrix(rho, "rho")
    h = as_matrix(h, "H")
    ops = _ops(lind)
    _check_dims(rho, h, ops)
    return -1j * commutator(h, rho) + dissipator(rho, ops)


def adjoint_generator(a, h, lind=()) -> np.ndarray:
    """The Heisenberg-picture generator ``L^+(A)`` dual to :func:`lindblad_rhs`."""
    a = as_matrix(a, "A")
    h = as_matrix(h, "H")
    ops = _ops(lind)
    _check_dims(a, h, ops)
    out = 1j * commutator(h, a)
    for op in ops:
        ld = dagger(op)
        out += ld @ a @ op - 0.5 * anticommutator(ld @ op, a)
    return out


def traceless(a) -> np.ndarray:
    a = np.asarray(a)
    return a - np.trace(a) / a.shape[0] * np.eye(a.shape[0])


def adjoint_rhs(sigma, h, lind=(), generator: Callable = adjoint_generator) -> np.ndarray:
    """Costate velocity ``-traceless(L^+(sigma))``.

    ``generator`` can be swapped for a deliberately wrong one to exercise the
    diagnostics' negative controls.
    """
    return -traceless(generator(sigma, h, lind))


# ---------------------------------------------------------------------------
# gauge freedom
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaugeTransform:
    """Shift ``(alpha, betas)`` followed by unitary mixing of the operators."""

    alpha: float = 0.0
    betas: tuple = ()
    mixing: np.ndarray | None = None

    def check(self, n_ops: int) -> None:
        if self.betas and len(self.betas) != n_ops:
            raise ValidationError(f"expected {n_ops} betas, got {len(self.betas)}")
        if self.mixing is not None:
            u = np.asarray(self.mixing, dtype=complex)
            if u.shape != (n_ops, n_ops):
                raise ValidationError(f"mixing must be {n_ops}x{n_ops}, got {u.shape}")
            if np.max(np.abs(dagger(u) @ u - np.eye(n_ops))) > 1e-12:
                raise ValidationError("mixing matrix is not unitary")


def gauge_apply(h, lind, g: GaugeTransform):
    """Apply a gauge transformation; the generated flow is unchanged.

    ``L_a -> L_a + beta_a``,
    ``H -> H + alpha + (1/2i) sum_a (beta_a^* L_a - beta_a L_a^+)``,
    then ``L_a -> sum_b U_ab L_b``.
    """
    h = as_matrix(h, "H")
    ops = _ops(lind)
    g.check(len(ops))
    n = h.shape[0]
    eye = np.eye(n)
    betas = g.betas if g.betas else (0.0,) * len(ops)
    h_new = h + g.alpha * eye
    shifted = []
    for op, beta in zip(ops, betas):
        h_new = h_new + (np.conj(beta) * op - beta * dagger(op)) / 2j
        shifted.append(op + beta * eye)
    if g.mixing is not None and shifted:
        u = np.asarray(g.mixing, dtype=complex)
        shifted = [sum(u[a, b] * shifted[b] for b in range(len(shifted))) for a in range(len(shifted))]
    return h_new, LindbladSet(shifted)


def gauge_fix(h, lind, return_transform: bool = False):
    """Bring ``(H, L)`` to canonical form within the gauge orbit.

    Operators are made traceless by a shift (compensated in ``H``), ``H``
    is made traceless, and the operators are mixed by the unitary that
    diagonalizes their Gram matrix, sorted by descending ``gamma``.
    """
    h = as_matrix(h, "H")
    ops = _ops(lind)
    n = h.shape[0]
    betas = tuple(-np.trace(op) / n for op in ops)
    h1, l1 = gauge_apply(h, ops, GaugeTransform(0.0, betas))
    alpha = -np.trace(h1).real / n
    h1 = h1 + alpha * np.eye(n)
    # also drop any imaginary trace left by roundoff
    h1 = h1 - np.trace(h1) / n * np.eye(n)
    mixing = None
    if len(l1):
        w = hermitian_eig(l1.gram).eigenvectors
        mixing = w.T
        l1 = LindbladSet([sum(mixing[a, b] * l1[b] for b in range(len(l1))) for a in range(len(l1))])
    if return_transform:
        return h1, l1, GaugeTransform(alpha, betas, mixing)
    return h1, l1


# ---------------------------------------------------------------------------
# metric and time functional
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MonotoneMetric:
    """Monotone metric ``g(A, B) = Tr[A c(L, R)(B)]``.

    Only the symmetric-logarithmic-derivative member is provided:
    ``eta(t) = (1 + t)/2``, ``c(x, y) = 2/(x + y)``.
    """

    kind: str = "sld"

    def __post_init__(self):
        if self.kind != "sld":
            raise ValidationError(f"unsupported metric {self.kind!r}; only 'sld' is available")

    @staticmethod
    def eta(t):
        return (1.0 + t) / 2.0

    @staticmethod
    def c(x, y):
        return 2.0 / (x + y)


SLD = MonotoneMetric()


def metric_eval(rho, a, b, metric: MonotoneMetric = SLD, full_rank_tol: float = FULL_RANK_TOL) -> float:
    """Evaluate ``g_rho(A, B)`` in the eigenbasis of ``rho``."""
    rho = as_matrix(rho, "rho")
    a = as_matrix(a, "A")
    b = as_matrix(b, "B")
    if a.shape != rho.shape or b.shape != rho.shape:
        raise DimensionError("metric arguments must match the state dimension")
    eig = hermitian_eig(rho)
    lam = eig.eigenvalues
    if lam[-1] <= full_rank_tol:
        raise ValidationError(f"state is not full rank (min eigenvalue {lam[-1]:.3e})")
    v = eig.eigenvectors
    ap = dagger(v) @ a @ v
    bp = dagger(v) @ b @ v
    c = metric.c(lam[:, None], lam[None, :])
    return float(np.real(np.sum(np.conj(ap) * c * bp)))


def time_functional(rho, rhodot, h, lind=(), metric: MonotoneMetric = SLD) -> float:
    """``sqrt(g(rhodot, rhodot) / g(L(rho), L(rho)))``; equals 1 on solutions."""
    flow = lindblad_rhs(rho, h, lind)
    den = metric_eval(rho, flow, flow, metric)
    if den <= 1e-300:
        raise ValidationError("generator vanishes at this state; time functional undefined")
    num = metric_eval(rho, rhodot, rhodot, metric)
    return float(np.sqrt(max(num, 0.0) / den))


# ---------------------------------------------------------------------------
# Kraus map
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KrausSet:
    """Short-time Kraus operators ``W_a`` for a step of length ``tau``."""

    ops: tuple
    tau: float
    completeness_defect: float = field(default=0.0)

    @property
    def defect_constant(self) -> float:
        """``C`` in ``||sum W^+ W - I|| = C tau^2``."""
        return self.completeness_defect / self.tau**2


def kraus_from_lindblad(h, lind, tau: float) -> KrausSet:
    """``W_0 = I - iH tau - (tau/2) sum L^+L``, ``W_a = sqrt(tau) L_a``."""
    if not tau > 0:
        raise ValidationError(f"tau must be positive, got {tau!r}")
    h = as_matrix(h, "H")
    ops = _ops(lind)
    n = h.shape[0]
    w0 = np.eye(n) - 1j * tau * h
    for op in ops:
        w0 = w0 - 0.5 * tau * dagger(op) @ op
    ws = (w0,) + tuple(np.sqrt(tau) * op for op in ops)
    total = sum(dagger(w) @ w for w in ws)
    defect = float(np.linalg.norm(total - np.eye(n)))
    return KrausSet(ws, float(tau), defect)


def kraus_apply(rho, kraus: KrausSet) -> np.ndarray:
    """``sum_a W_a rho W_a^+``, renormalized to unit trace."""
    rho = as_matrix(rho, "rho")
    if kraus.ops[0].shape != rho.shape:
        raise DimensionError("Kraus operators do not match the state dimension")
    out = sum(w @ rho @ dagger(w) for w in kraus.ops)
    tr = np.trace(out).real
    logger.debug("kraus trace defect %.3e", abs(tr - 1.0))
    return out / tr


# ---------------------------------------------------------------------------
# optimality
# ---------------------------------------------------------------------------


def f_operator(rho, sigma) -> np.ndarray:
    """``F = -i[rho, sigma']``, Hermitian and traceless."""
    return -1j * commutator(rho, sigma)


def brachistochrone_residual(rhos: Sequence, sigmas: Sequence, hams: Sequence, dt: float) -> float:
    """Max over interior samples of ``||i dF/dt - [H, F]||`` (central differences).

    Inputs are uniformly spaced samples of the state, costate and Hamiltonian.
    """
    if not (len(rhos) == len(sigmas) == len(hams)):
        raise DimensionError("sample sequences differ in length")
    if len(rhos) < 3:
        raise ValidationError("at least 3 samples are required")
    if not dt > 0:
        raise ValidationError("dt must be positive")
    fs = [f_operator(r, s) for r, s in zip(rhos, sigmas)]
    worst = 0.0
    for k in range(1, len(fs) - 1):
        fdot = (fs[k + 1] - fs[k - 1]) / (2 * dt)
        res = np.linalg.norm(1j * fdot - commutator(hams[k], fs[k]))
        worst = max(worst, float(res))
    return worst


def evolve_density(rho0, h, lind, dt: float, n_steps: int) -> np.ndarray:
    """Classical RK4 for the master equation with constant ``H`` and ``L``.

    Returns the states at ``k dt`` for ``k = 0..n_steps`` stacked along axis 0.
    """
    rho = as_matrix(rho0, "rho0")
    h = as_matrix(h, "H")
    ops = _ops(lind)
    _check_dims(rho, h, ops)
    out = np.empty((n_steps + 1,) + rho.shape, dtype=complex)
    out[0] = rho
    for k in range(n_steps):
        k1 = lindblad_rhs(rho, h, ops)
        k2 = lindblad_rhs(rho + 0.5 * dt * k1, h, ops)
        k3 = lindblad_rhs(rho + 0.5 * dt * k2, h, ops)
        k4 = lindblad_rhs(rho + dt * k3, h, ops)
        rho = rho + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[k + 1] = rho
    return out
