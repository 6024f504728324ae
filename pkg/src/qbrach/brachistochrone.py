"""Time-optimal one-qubit evolution under a Lindblad master equation.

A qubit is written as ``rho = (1 + r.sigma)/2``, the costate as
``sigma' = s.sigma``, ``H = h.sigma`` and ``L_a = l_a.sigma``. Along an
optimal trajectory ``|h| = omega``, ``r x s`` is conserved and fixes the
direction of ``h``, and the Lindblad vectors ``l_a`` are eigenvectors of the
Hermitian matrix ``K(r, s)`` scaled to ``|l_a| = gamma_a``, with the largest
``gamma`` on the largest eigenvalue.
"""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import DimensionError, ToleranceError, ValidationError
from .qalg import PAULI, as_matrix, hermitian_eig, pauli_matrix
from .trajectory import TrajectoryRecord

logger = logging.getLogger(__name__)

DEGENERACY_THRESHOLD = _kernels.DEGENERACY_THRESHOLD
BLOCH_NORM_TOL = 1e-6


# ---------------------------------------------------------------------------
# Bloch representation
# ---------------------------------------------------------------------------


def bloch_from_density(rho) -> np.ndarray:
    """``r_j = Tr(rho sigma_j)``."""
    rho = as_matrix(rho, "rho")
    if rho.shape != (2, 2):
        raise DimensionError(f"expected a one-qubit state, got shape {rho.shape}")
    return np.array([np.trace(rho @ p).real for p in PAULI])


def density_from_bloch(r) -> np.ndarray:
    r = _vec3(r, "r")
    return 0.5 * (np.eye(2) + pauli_matrix(r.astype(complex)))


def costate_matrix(s) -> np.ndarray:
    return pauli_matrix(_vec3(s, "s").astype(complex))


def _vec3(v, name: str, dtype=float) -> np.ndarray:
    v = np.asarray(v, dtype=dtype)
    if v.shape != (3,):
        raise DimensionError(f"{name} must be a 3-vector, got shape {v.shape}")
    return v


def _lvec_matrix(ls) -> np.ndarray:
    ls = [_vec3(l, "l", complex) for l in ls]
    if not ls:
        return np.zeros((3, 0), dtype=complex)
    return np.ascontiguousarray(np.stack(ls, axis=1))


def master_rhs_vec(r, h, ls: Sequence = ()) -> np.ndarray:
    """``dr/dt = 2[h x r + sum_l (Re((l.r) l*) - |l|^2 r + i l x l*)]``."""
    dr = np.empty(3)
    ds = np.empty(3)
    r = _vec3(r, "r")
    _kernels.qubit_fields_into(r, np.zeros(3), _vec3(h, "h"), _lvec_matrix(ls), dr, ds)
    return dr


def adjoint_rhs_vec(s, h, ls: Sequence = ()) -> np.ndarray:
    """``ds/dt = 2[h x s - sum_l (Re((l.s) l*) - |l|^2 s)]``."""
    dr = np.empty(3)
    ds = np.empty(3)
    _kernels.qubit_fields_into(np.zeros(3), _vec3(s, "s"), _vec3(h, "h"), _lvec_matrix(ls), dr, ds)
    return ds


# ---------------------------------------------------------------------------
# K matrix and Lindblad vectors
# ---------------------------------------------------------------------------


def k_matrix(r, s) -> np.ndarray:
    """``K_jk = r_j s_k + r_k s_j - 2i eps_jkl s_l``."""
    out = np.empty((3, 3), dtype=complex)
    _kernels.k_matrix_into(_vec3(r, "r"), _vec3(s, "s"), out)
    return out


@dataclass(frozen=True)
class FrameBasis:
    """Orthonormal frame with ``r = |r|(cos(theta/2) e3 + sin(theta/2) e1)``
    and ``s = |s|(cos(theta/2) e3 - sin(theta/2) e1)``."""

    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray
    theta: float
    r: float
    s: float

    @property
    def matrix(self) -> np.ndarray:
        """Rows are ``e1, e2, e3``: maps lab components to frame components."""
        return np.stack([self.e1, self.e2, self.e3])


def _perpendicular(v: np.ndarray) -> np.ndarray:
    trial = np.eye(3)[int(np.argmin(np.abs(v)))]
    u = trial - np.dot(trial, v) * v
    return u / np.linalg.norm(u)


def frame_basis(r, s) -> FrameBasis:
    """Right-handed frame adapted to the pair ``(r, s)``."""
    r = _vec3(r, "r")
    s = _vec3(s, "s")
    rn, sn = np.linalg.norm(r), np.linalg.norm(s)
    if rn == 0 or sn == 0:
        raise ValidationError("frame needs nonzero r and s")
    rh, sh = r / rn, s / sn
    theta = float(np.arccos(np.clip(np.dot(rh, sh), -1.0, 1.0)))
    c, si = np.cos(theta / 2), np.sin(theta / 2)
    if c > 1e-8 and si > 1e-8:
        e3 = (rh + sh) / (2 * c)
        e1 = (rh - sh) / (2 * si)
    elif si <= 1e-8:
        e3 = (rh + sh) / np.linalg.norm(rh + sh)
        e1 = _perpendicular(e3)
    else:
        e1 = (rh - sh) / np.linalg.norm(rh - sh)
        e3 = _perpendicular(e1)
    # re-orthogonalize against roundoff
    e1 = e1 - np.dot(e1, e3) * e3
    e1 /= np.linalg.norm(e1)
    e3 /= np.linalg.norm(e3)
    e2 = np.cross(e3, e1)
    return FrameBasis(e1, e2, e3, theta, float(rn), float(sn))


def k_matrix_frame(r: float, s: float, theta: float) -> np.ndarray:
    """K written in the adapted frame ``(e1, e2, e3)``."""
    c, si = np.cos(theta / 2), np.sin(theta / 2)
    return 2 * s * np.array([
        [-r * si**2, -1j * c, 0],
        [1j * c, 0, 1j * si],
        [0, -1j * si, r * c**2],
    ])


def lindblad_vectors(kmat, gammas, prev=None):
    """Optimal Lindblad vectors: eigenvectors of K scaled by ``gammas``.

    Returns ``(vectors, eigenvalues)`` where ``vectors`` has one column per
    channel, in descending eigenvalue order. With ``prev`` (the previous
    vectors, same layout) phases and degenerate subspaces are chosen for
    continuity; without it each vector's first significant component is
    made real and positive.
    """
    kmat = as_matrix(kmat, "K")
    if kmat.shape != (3, 3):
        raise DimensionError("K must be 3x3")
    gammas = np.asarray(gammas, dtype=float)
    if gammas.shape != (3,) or np.any(gammas < 0):
        raise ValidationError("gammas must be three non-negative numbers")
    eig = hermitian_eig(kmat)
    w, v = eig.eigenvalues, np.ascontiguousarray(eig.eigenvectors)
    if prev is None:
        _kernels.canonical_phase(v)
    else:
        p = np.asarray(prev, dtype=complex)
        norms = np.linalg.norm(p, axis=0)
        unit_prev = np.where(norms > 0, p / np.where(norms > 0, norms, 1), v)
        tol = 1e-9 * max(1.0, abs(w[0]), abs(w[-1]))
        jumps = _kernels.align_columns(v, w, np.ascontiguousarray(unit_prev), tol)
        if jumps:
            logger.info("Lindblad eigenvector branch change (%d channels)", jumps)
    return v * gammas[None, :], w


# ---------------------------------------------------------------------------
# optimal Hamiltonian and integration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BrachConfig:
    """Parameters of the one-qubit optimal-control problem.

    omega : Hamiltonian strength, ``|h| = omega``
    gammas : Lindblad magnitudes, assigned to eigenvalues of K in descending order
    sign : branch of ``h = +-omega (r x s)/|r x s|``
    degenerate_axis : direction of ``h`` when ``r x s = 0``
    """

    omega: float = 1.0
    gammas: tuple = (1.0, 0.0, 0.0)
    sign: int = 1
    degenerate_axis: tuple = (0.0, 0.0, 1.0)
    dt: float = 1e-3
    t_max: float = 5.0
    conservation_tol: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        object.__setattr__(self, "degenerate_axis", tuple(float(x) for x in self.degenerate_axis))
        self.validate()

    def validate(self) -> None:
        if not (np.isfinite(self.omega) and self.omega > 0):
            raise ValidationError("omega must be positive")
        if len(self.gammas) != 3 or any(not np.isfinite(g) or g < 0 for g in self.gammas):
            raise ValidationError("gammas must be three non-negative numbers")
        if self.sign not in (1, -1):
            raise ValidationError("sign must be +1 or -1")
        axis = np.asarray(self.degenerate_axis)
        if axis.shape != (3,) or abs(np.linalg.norm(axis) - 1.0) > 1e-12:
            raise ValidationError("degenerate_axis must be a unit 3-vector")
        if not (self.dt > 0 and self.t_max > 0 and self.dt < self.t_max):
            raise ValidationError("need 0 < dt < t_max")
        if not self.conservation_tol > 0:
            raise ValidationError("conservation_tol must be positive")

    @property
    def n_steps(self) -> int:
        return int(np.floor(self.t_max / self.dt + 1e-9))


def hamiltonian_vec(r, s, cfg: BrachConfig) -> np.ndarray:
    """Optimal ``h``: along ``+-(r x s)`` with ``|h| = omega``."""
    c = np.cross(_vec3(r, "r"), _vec3(s, "s"))
    nrm = np.linalg.norm(c)
    if nrm > DEGENERACY_THRESHOLD:
        return cfg.sign * cfg.omega * c / nrm
    return cfg.omega * np.asarray(cfg.degenerate_axis)


def bloch_fidelity(r, target) -> np.ndarray:
    """Fidelity between qubit states given by Bloch vectors (rows of ``r``)."""
    r = np.atleast_2d(r)
    tv = _vec3(target, "target")
    mix = np.sqrt(np.clip((1 - np.sum(r**2, axis=1)) * (1 - tv @ tv), 0.0, None))
    return 0.5 * (1 + r @ tv + mix)


_STATUS_TEXT = {
    _kernels.STATUS_DRIFT: "conserved vector r x s drifted beyond tolerance",
    _kernels.STATUS_NORM: "Bloch vector left the unit ball",
    _kernels.STATUS_NONFINITE: "integration produced non-finite values",
}


def integrate(cfg: BrachConfig, r0, s0, record_stride: int = 1, target=None) -> TrajectoryRecord:
    """Integrate the coupled state/costate equations with classical RK4.

    ``h`` and the Lindblad vectors are recomputed from ``(r, s)`` at every
    stage. Raises :class:`ToleranceError` when ``r x s`` drifts by more than
    ``cfg.conservation_tol`` or ``|r|`` exceeds ``1 + 1e-6``.
    """
    r0 = _vec3(r0, "r0")
    s0 = _vec3(s0, "s0")
    if np.linalg.norm(r0) > 1.0 + 1e-12:
        raise ValidationError("|r0| must not exceed 1")
    sn = np.linalg.norm(s0)
    if not sn > 0 or not np.isfinite(sn):
        raise ValidationError("costate s0 must be a nonzero finite vector")
    if record_stride < 1:
        raise ValidationError("record_stride must be >= 1")
    y0 = np.concatenate([r0, s0 / sn, [np.log(sn)]])
    nsteps = cfg.n_steps
    out = _kernels.integrate_optimal_qubit(
        y0, float(cfg.omega), float(cfg.sign), np.asarray(cfg.gammas), np.asarray(cfg.degenerate_axis),
        float(cfg.dt), nsteps, int(record_stride), float(cfg.conservation_tol), BLOCH_NORM_TOL)
    R, S, H, L, NU, C, n_rec, step, status, drift, eig_res, max_norm, jumps = out
    if status != _kernels.STATUS_OK:
        raise ToleranceError(f"{_STATUS_TEXT[status]} at t={step * cfg.dt:.6g} "
                             f"(max drift {drift:.3e}, max |r| {max_norm:.12g})")
    if jumps:
        logger.info("Lindblad eigen-branch changed %d times during the run", jumps)
    spacing = cfg.dt * record_stride
    t = np.arange(n_rec) * spacing
    fid = bloch_fidelity(R[:n_rec], target) if target is not None else None
    diag = {
        "max_conservation_drift": float(drift),
        "max_eigen_residual": float(eig_res),
        "max_bloch_norm": float(max(max_norm, np.linalg.norm(r0))),
        "branch_changes": int(jumps),
        "steps": int(step),
        "dt": float(cfg.dt),
        "lambda0": float(np.linalg.norm(C[0]) / cfg.omega),
    }
    return TrajectoryRecord(t=t, r=R[:n_rec], spacing=spacing, s=S[:n_rec], h=H[:n_rec],
                            lindblad=L[:n_rec], conserved=C[:n_rec], fidelity=fid,
                            diagnostics=diag)


def rotation_matrix(axis, angle: float) -> np.ndarray:
    """Right-handed rotation by ``angle`` about unit ``axis`` (Rodrigues)."""
    k = np.asarray(axis, dtype=float)
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + np.sin(angle) * kx + (1 - np.cos(angle)) * kx @ kx


def rotating_frame(record: TrajectoryRecord) -> np.ndarray:
    """Bloch vectors with the Hamiltonian precession removed.

    On optimal trajectories ``h`` is constant, so the frame rotation is
    ``exp(-2 t h x)``; the result is the purely dissipative motion.
    """
    if record.h is None:
        raise ValidationError("record carries no Hamiltonian samples")
    out = np.empty_like(record.r)
    for k, (tk, hk, rk) in enumerate(zip(record.t, record.h, record.r)):
        w = np.linalg.norm(hk)
        out[k] = rk if w == 0 else rotation_matrix(hk / w, -2 * w * tk) @ rk
    return out


def parallel_case_solution(t, r0: float, gammas) -> np.ndarray:
    """Component of ``r`` along ``e3`` when ``r x s = 0``, rotating frame.

    ``r'(t) = g + (r'(0) - g) exp(-2(gp^2 + gm^2) t)`` with
    ``g = (gp^2 - gm^2)/(gp^2 + gm^2)``; ``gammas = (gp, gm)``.
    """
    gp, gm = (float(g) for g in gammas[:2])
    tot = gp**2 + gm**2
    if tot <= 0:
        raise ValidationError("at least one of the two damping magnitudes must be nonzero")
    g = (gp**2 - gm**2) / tot
    return g + (r0 - g) * np.exp(-2 * tot * np.asarray(t, dtype=float))


# ---------------------------------------------------------------------------
# initial conditions and shooting
# ---------------------------------------------------------------------------


def initial_costate(r0, angle: float, in_plane=(1.0, 0.0, 0.0), axis=(0.0, 0.0, 1.0)) -> np.ndarray:
    """Unit costate making ``angle`` with ``-r0``.

    The costate points away from the state: ``s0 = -(cos a r0^ + sin a u)``
    with ``u`` the unit part of ``in_plane`` orthogonal to ``r0``. For
    ``r0 = 0`` the reference direction is ``axis``.
    """
    r0 = _vec3(r0, "r0")
    nrm = np.linalg.norm(r0)
    rh = r0 / nrm if nrm > 0 else _vec3(axis, "axis") / np.linalg.norm(axis)
    u = _vec3(in_plane, "in_plane")
    u = u - np.dot(u, rh) * rh
    if np.linalg.norm(u) < 1e-12:
        u = _perpendicular(rh)
    u = u / np.linalg.norm(u)
    return -(np.cos(angle) * rh + np.sin(angle) * u)


def angle_family(cfg: BrachConfig, r0=(0.0, 0.0, 0.8), n_angles: int = 6, record_stride: int = 1,
                 target=(0.0, 0.0, -1.0)):
    """Trajectories for initial angles ``k pi / n_angles``, ``k = 0..n_angles-1``."""
    out = []
    for k in range(n_angles):
        angle = k * np.pi / n_angles
        rec = integrate(cfg, r0, initial_costate(r0, angle), record_stride, target)
        rec.diagnostics["initial_angle"] = angle
        out.append(rec)
    return out


_GOLDEN = (np.sqrt(5.0) - 1) / 2


def shoot(cfg: BrachConfig, r0, target, bracket=(0.0, np.pi), frame: str = "lab",
          in_plane=(1.0, 0.0, 0.0), tol: float = 1e-4, t_max: float | None = None,
          record_stride: int = 1, n_grid: int = 24):
    """Golden-section search over the initial costate angle.

    Minimizes the distance between ``r(t_max)`` (lab or rotating frame) and
    ``target``. The final-distance landscape is multimodal, so a coarse grid
    of ``n_grid`` angles first picks the cell that the golden-section search
    then refines. Returns ``(angle, record, distance)``.
    """
    r0 = _vec3(r0, "r0")
    target = _vec3(target, "target")
    rh = r0 / np.linalg.norm(r0) if np.linalg.norm(r0) > 0 else np.asarray(cfg.degenerate_axis)
    u = -initial_costate(r0, np.pi / 2, in_plane, cfg.degenerate_axis)
    normal = np.cross(rh, u)
    if abs(np.dot(target, normal)) > 1e-9:
        raise ValidationError("target is not in the plane spanned by r0 and the in-plane direction")
    if frame not in ("lab", "rotating"):
        raise ValidationError("frame must be 'lab' or 'rotating'")
    lo, hi = (float(b) for b in bracket)
    if t_max is not None and t_max == 0:
        rec = TrajectoryRecord(t=np.zeros(1), r=r0[None, :].copy(), spacing=cfg.dt,
                               fidelity=bloch_fidelity(r0, target))
        return 0.5 * (lo + hi), rec, float(np.linalg.norm(r0 - target))
    run_cfg = cfg if t_max is None else BrachConfig(cfg.omega, cfg.gammas, cfg.sign, cfg.degenerate_axis,
                                                    cfg.dt, t_max, cfg.conservation_tol)

    def run(angle):
        rec = integrate(run_cfg, r0, initial_costate(r0, angle, in_plane, cfg.degenerate_axis),
                        record_stride, target)
        end = rotating_frame(rec)[-1] if frame == "rotating" else rec.r[-1]
        return float(np.linalg.norm(end - target)), rec

    grid = np.linspace(lo, hi, n_grid + 1)
    vals = [run(x)[0] for x in grid]
    i = int(np.argmin(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, n_grid)]
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = run(c)[0], run(d)[0]
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = run(c)[0]
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = run(d)[0]
    best = 0.5 * (a + b)
    dist, rec = run(best)
    # the landscape can jump where r0 x s0 vanishes; keep the best grid point if it wins
    if vals[i] < dist:
        best = float(grid[i])
        dist, rec = run(best)
    rec.diagnostics["initial_angle"] = best
    return best, rec, dist
