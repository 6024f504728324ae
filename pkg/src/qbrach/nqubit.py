"""Closed n-qubit model: optimal unitary evolution followed by one final measurement.

Qubit 1 is the system and the other ``n - 1`` qubits are the environment,
all starting spin up. Basis index ``k`` is the binary label with qubit 1 as
the most significant bit, ``|0> = |up...up>`` and
``|2^(n-1)> = |down>|up...up>``. The optimal Hamiltonian

    H = sqrt(2^(n-1)) omega (|0><2^(n-1)| + |2^(n-1)><0|)

acts only on that two-level subspace, which is what the fast path uses.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ToleranceError, ValidationError
from .qalg import SIGMA_Y, SIGMA_Z, matrix_exp_i, partial_trace

MAX_QUBITS = 12
MAX_DENSE_QUBITS = 5
CONSISTENCY_TOL = 1e-12


@dataclass(frozen=True)
class NQubitConfig:
    n: int = 1
    omega: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValidationError("n must be a positive integer")
        if self.n > MAX_QUBITS:
            raise DimensionError(f"n = {self.n} exceeds the supported maximum of {MAX_QUBITS} qubits")
        if not (np.isfinite(self.omega) and self.omega > 0):
            raise ValidationError("omega must be positive")

    @property
    def dim(self) -> int:
        return 2**self.n

    @property
    def partner(self) -> int:
        """Index of ``|down>|up...up>``."""
        return 2 ** (self.n - 1)

    @property
    def coupling(self) -> float:
        return np.sqrt(2.0 ** (self.n - 1)) * self.omega


def _require_dense(cfg: NQubitConfig) -> None:
    if cfg.n > MAX_DENSE_QUBITS:
        raise DimensionError(f"dense matrices are limited to n <= {MAX_DENSE_QUBITS}")


def optimal_hamiltonian(cfg: NQubitConfig) -> np.ndarray:
    """Dense optimal Hamiltonian (``n <= 5``)."""
    _require_dense(cfg)
    h = np.zeros((cfg.dim, cfg.dim), dtype=complex)
    h[0, cfg.partner] = h[cfg.partner, 0] = cfg.coupling
    return h


@dataclass(frozen=True)
class TwoLevelUnitary:
    """``U = cos(x) P - i sin(x) X`` on span{|0>, |m>}, identity elsewhere."""

    n: int
    partner: int
    cos: float
    sin: float

    @property
    def dim(self) -> int:
        return 2**self.n

    def apply(self, vec) -> np.ndarray:
        v = np.array(vec, dtype=complex)
        if v.shape[0] != self.dim:
            raise DimensionError(f"vector length {v.shape[0]} does not match dimension {self.dim}")
        a, b = v[0].copy(), v[self.partner].copy()
        v[0] = self.cos * a - 1j * self.sin * b
        v[self.partner] = -1j * self.sin * a + self.cos * b
        return v

    def to_dense(self) -> np.ndarray:
        if self.n > MAX_DENSE_QUBITS:
            raise DimensionError(f"dense matrices are limited to n <= {MAX_DENSE_QUBITS}")
        return self.apply(np.eye(self.dim, dtype=complex))


def evolve_unitary(cfg: NQubitConfig, t: float) -> TwoLevelUnitary:
    x = cfg.coupling * t
    return TwoLevelUnitary(cfg.n, cfg.partner, float(np.cos(x)), float(np.sin(x)))


def closed_form_state(cfg: NQubitConfig, t: float) -> np.ndarray:
    """``(1 + cos(2x) sigma_z - sin(2x) sigma_y)/2`` with ``x = sqrt(2^(n-1)) omega t``."""
    x2 = 2 * cfg.coupling * t
    return 0.5 * (np.eye(2) + np.cos(x2) * SIGMA_Z - np.sin(x2) * SIGMA_Y)


def _initial_vector(cfg: NQubitConfig) -> np.ndarray:
    v = np.zeros(cfg.dim, dtype=complex)
    v[0] = 1.0
    return v


def reduced_state(cfg: NQubitConfig, t: float, dense: bool = False) -> np.ndarray:
    """System-qubit state at time ``t``.

    Computed from the exact global evolution (two-level fast path, or the
    dense exponential when ``dense=True``) and checked against the closed form.
    """
    if dense:
        _require_dense(cfg)
        u = matrix_exp_i(optimal_hamiltonian(cfg), t)
        psi0 = _initial_vector(cfg)
        rho = partial_trace(u @ np.outer(psi0, psi0.conj()) @ u.conj().T, (2, cfg.dim // 2), keep=0)
    else:
        psi = evolve_unitary(cfg, t).apply(_initial_vector(cfg)).reshape(2, cfg.dim // 2)
        rho = psi @ psi.conj().T
    ref = closed_form_state(cfg, t)
    err = float(np.max(np.abs(rho - ref)))
    if err > CONSISTENCY_TOL:
        raise ToleranceError(f"reduced state disagrees with the closed form by {err:.3e}")
    return rho


def optimal_time(cfg: NQubitConfig) -> float:
    """``T = pi / (2 sqrt(2^(n-1)) omega)``."""
    return float(np.pi / (2 * cfg.coupling))


def fidelity_curve(cfg: NQubitConfig, t_grid) -> np.ndarray:
    """Rows ``(t, <down|rho(t)|down>)``."""
    t_grid = np.asarray(t_grid, dtype=float)
    fid = np.array([reduced_state(cfg, t)[1, 1].real for t in t_grid])
    return np.column_stack([t_grid, fid])


def first_arrival_time(cfg: NQubitConfig, threshold: float, t_grid=None, xtol: float = 1e-14) -> float:
    """Earliest time the fidelity reaches ``threshold``.

    The first grid sample at or above the threshold is located, then the
    crossing inside that grid cell is refined by bisection. Returns ``nan``
    if the threshold is never reached on the grid.
    """
    if t_grid is None:
        t_grid = np.linspace(0.0, 2 * optimal_time(cfg), 4097)
    curve = fidelity_curve(cfg, t_grid)
    hit = np.nonzero(curve[:, 1] >= threshold)[0]
    if len(hit) == 0:
        return float("nan")
    k = int(hit[0])
    if k == 0:
        return float(curve[0, 0])

    def f(t):
        return reduced_state(cfg, t)[1, 1].real - threshold

    lo, hi = curve[k - 1, 0], curve[k, 0]
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if f(mid) >= 0:
            hi = mid
        else:
            lo = mid
    return float(hi)


def trivial_extension_norm(h, m: int) -> float:
    """``Tr (H (x) I_M)^2 / (M N)``."""
    h = np.asarray(h, dtype=complex)
    ext = np.kron(h, np.eye(m))
    return float(np.trace(ext @ ext).real / ext.shape[0])
