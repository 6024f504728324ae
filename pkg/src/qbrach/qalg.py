"""Dense complex linear algebra for small Hilbert spaces (dimension <= 32).

Matrices are plain ``numpy`` complex arrays. The eigensolver is a cyclic
Jacobi method with a fixed sweep order, so repeated runs on the same input
give bit-identical results.

Serialized complex data uses interleaved ``(re, im)`` pairs in row-major
order; see :func:`to_interleaved`.
"""

from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels
from .errors import DimensionError, NotHermitianError

MAX_DIM = 32
HERMITIAN_TOL = 1e-10

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY2 = np.eye(2, dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)


class HermitianEig(NamedTuple):
    """Eigendecomposition of a Hermitian matrix.

    eigenvalues : real, descending
    eigenvectors : orthonormal columns, ``A = V diag(w) V^dagger``
    correction : Frobenius norm of the anti-Hermitian part removed before solving
    sweeps : Jacobi sweeps used
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    correction: float
    sweeps: int


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a square complex array, raising :class:`DimensionError` otherwise."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionError(f"{name} must be a non-empty square matrix, got shape {m.shape}")
    return m


def _same_dim(a, b):
    a = as_matrix(a, "A")
    b = as_matrix(b, "B")
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a, b


def commutator(a, b) -> np.ndarray:
    """``AB - BA``."""
    a, b = _same_dim(a, b)
    return a @ b - b @ a


def anticommutator(a, b) -> np.ndarray:
    """``AB + BA``."""
    a, b = _same_dim(a, b)
    return a @ b + b @ a


def dagger(a) -> np.ndarray:
    return np.conj(np.asarray(a)).T


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product; the first factor is the most significant index."""
    return np.kron(as_matrix(a, "A"), as_matrix(b, "B"))


def partial_trace(m, dims: Sequence[int], keep: int = 0) -> np.ndarray:
    """Reduce a bipartite operator to one subsystem.

    Parameters
    ----------
    m : (dA*dB, dA*dB) array
    dims : (dA, dB)
    keep : 0 keeps the first factor (traces out the second), 1 the reverse.
    """
    m = as_matrix(m)
    if len(dims) != 2:
        raise DimensionError("dims must be a pair (dA, dB)")
    da, db = (int(d) for d in dims)
    if da < 1 or db < 1 or da * db != m.shape[0]:
        raise DimensionError(f"dims {tuple(dims)} inconsistent with matrix of size {m.shape[0]}")
    t = m.reshape(da, db, da, db)
    if keep == 0:
        return np.einsum("ijkj->ik", t)
    if keep == 1:
        return np.einsum("ijil->jl", t)
    raise DimensionError(f"keep must be 0 or 1, got {keep!r}")


def hermitian_defect(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a - dagger(a)))) if a.size else 0.0


def check_hermitian(a, tol: float = HERMITIAN_TOL, name: str = "matrix") -> np.ndarray:
    a = as_matrix(a, name)
    scale = max(1.0, float(np.max(np.abs(a))))
    if hermitian_defect(a) > tol * scale:
        raise NotHermitianError(f"{name} is not Hermitian (defect {hermitian_defect(a):.3e})")
    return a


def hermitian_eig(a, tol: float = HERMITIAN_TOL) -> HermitianEig:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    The input is symmetrized as ``(A + A^dagger)/2`` first; the size of that
    correction is returned as a diagnostic.
    """
    a = check_hermitian(a, tol)
    if a.shape[0] > MAX_DIM:
        raise DimensionError(f"dimension {a.shape[0]} exceeds the supported maximum {MAX_DIM}")
    sym = 0.5 * (a + dagger(a))
    correction = float(np.linalg.norm(a - sym))
    w, v, sweeps = _kernels.eigh_desc(np.ascontiguousarray(sym))
    return HermitianEig(w, v, correction, int(sweeps))


def matrix_exp_i(h, t: float) -> np.ndarray:
    """``exp(-i H t)`` for Hermitian ``H`` via its eigendecomposition."""
    eig = hermitian_eig(h)
    v = eig.eigenvectors
    return (v * np.exp(-1j * eig.eigenvalues * t)) @ dagger(v)


def pauli_matrix(v) -> np.ndarray:
    """``v . sigma`` for a (possibly complex) 3-vector ``v``."""
    v = np.asarray(v)
    if v.shape != (3,):
        raise DimensionError(f"expected a 3-vector, got shape {v.shape}")
    return v[0] * SIGMA_X + v[1] * SIGMA_Y + v[2] * SIGMA_Z


def pauli_coefficients(m) -> np.ndarray:
    """Coefficients ``c_j = Tr(M sigma_j)/2`` so that ``M = c0 I + c . sigma``."""
    m = as_matrix(m)
    if m.shape != (2, 2):
        raise DimensionError(f"expected a 2x2 matrix, got shape {m.shape}")
    return np.array([np.trace(m @ p) / 2 for p in PAULI])


def to_interleaved(m) -> np.ndarray:
    """Flatten a complex matrix row-major into ``[re00, im00, re01, im01, ...]``."""
    m = np.ascontiguousarray(np.asarray(m, dtype=complex))
    return m.reshape(-1).view(np.float64).copy()


def from_interleaved(values, dim: int) -> np.ndarray:
    """Inverse of :func:`to_interleaved`."""
    vals = np.ascontiguousarray(np.asarray(values, dtype=np.float64))
    if vals.size != 2 * dim * dim:
        raise DimensionError(f"expected {2 * dim * dim} values for dim {dim}, got {vals.size}")
    return vals.view(np.complex128).reshape(dim, dim).copy()
