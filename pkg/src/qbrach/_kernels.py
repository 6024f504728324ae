"""Compiled numerical kernels.

Nopython numba code working on preallocated arrays. The public, validated
entry points are in :mod:`qbrach.qalg` (eigensolver) and
:mod:`qbrach.brachistochrone` (one-qubit integrator).
"""

import numpy as np
from numba import njit

JACOBI_MAX_SWEEPS = 100
# |r x s| below this selects the degenerate branch of the optimal Hamiltonian
DEGENERACY_THRESHOLD = 1e-10

STATUS_OK = 0
STATUS_DRIFT = 1
STATUS_NORM = 2
STATUS_NONFINITE = 3


@njit(cache=True)
def jacobi_inplace(a, v):
    """Cyclic Jacobi diagonalization of a complex Hermitian matrix.

    ``a`` is overwritten; on return its diagonal holds the (unsorted)
    eigenvalues and the columns of ``v`` the eigenvectors. Rotations sweep
    the upper triangle row by row, so results are reproducible bit-for-bit.
    Returns the number of sweeps, or -1 if the sweep limit was hit.
    """
    n = a.shape[0]
    for i in range(n):
        for j in range(n):
            v[i, j] = 1.0 if i == j else 0.0
    total = 0.0
    for i in range(n):
        for j in range(n):
            total += a[i, j].real ** 2 + a[i, j].imag ** 2
    if total == 0.0:
        return 0
    tol = 1e-32 * total
    for sweep in range(JACOBI_MAX_SWEEPS):
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += a[p, q].real ** 2 + a[p, q].imag ** 2
        if 2.0 * off <= tol:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                m = abs(apq)
                if m == 0.0:
                    continue
                ph = apq / m
                theta = 0.5 * np.arctan2(2.0 * m, a[q, q].real - a[p, p].real)
                c = np.cos(theta)
                s = np.sin(theta)
                sp = s * ph
                spc = s * np.conj(ph)
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - spc * akq
                    a[k, q] = sp * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - sp * aqk
                    a[q, k] = spc * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - spc * vkq
                    v[k, q] = sp * vkp + c * vkq
    return -1


@njit(cache=True)
def eigh_desc(a):
    """Eigenvalues (descending) and eigenvectors of Hermitian ``a``."""
    n = a.shape[0]
    work = a.copy()
    v = np.empty((n, n), dtype=np.complex128)
    sweeps = jacobi_inplace(work, v)
    w = np.empty(n)
    for i in range(n):
        w[i] = work[i, i].real
    idx = np.argsort(-w, kind="mergesort")
    ws = np.empty(n)
    vs = np.empty((n, n), dtype=np.complex128)
    for j in range(n):
        ws[j] = w[idx[j]]
        for i in range(n):
            vs[i, j] = v[i, idx[j]]
    return ws, vs, sweeps


# ---------------------------------------------------------------------------
# one-qubit optimal dynamics
# ---------------------------------------------------------------------------


@njit(cache=True)
def k_matrix_into(r, s, out):
    for j in range(3):
        for k in range(3):
            out[j, k] = r[j] * s[k] + r[k] * s[j]
    out[0, 1] += -2j * s[2]
    out[1, 0] += 2j * s[2]
    out[1, 2] += -2j * s[0]
    out[2, 1] += 2j * s[0]
    out[2, 0] += -2j * s[1]
    out[0, 2] += 2j * s[1]


@njit(cache=True)
def eig3_desc_into(kmat, work, v, w, vs):
    """Descending eigenpairs of a 3x3 Hermitian matrix into ``w``/``vs``."""
    for i in range(3):
        for j in range(3):
            work[i, j] = kmat[i, j]
    jacobi_inplace(work, v)
    d0 = work[0, 0].real
    d1 = work[1, 1].real
    d2 = work[2, 2].real
    # stable descending order of three values
    i0, i1, i2 = 0, 1, 2
    if d1 > d0:
        i0, i1 = 1, 0
    vals = (d0, d1, d2)
    if d2 > vals[i1]:
        if d2 > vals[i0]:
            i0, i1, i2 = 2, i0, i1
        else:
            i1, i2 = 2, i1
    w[0] = vals[i0]
    w[1] = vals[i1]
    w[2] = vals[i2]
    for i in range(3):
        vs[i, 0] = v[i, i0]
        vs[i, 1] = v[i, i1]
        vs[i, 2] = v[i, i2]


@njit(cache=True)
def canonical_phase(vs):
    """Make the first non-negligible component of each column real positive."""
    n = vs.shape[0]
    for a in range(vs.shape[1]):
        for i in range(n):
            z = vs[i, a]
            mag = abs(z)
            if mag > 1e-10:
                ph = np.conj(z) / mag
                for k in range(n):
                    vs[k, a] = vs[k, a] * ph
                vs[i, a] = vs[i, a].real + 0j
                break


@njit(cache=True)
def align_columns(vs, w, prev, degen_tol):
    """Rotate/phase the columns of ``vs`` for continuity with ``prev``.

    Within groups of eigenvalues closer than ``degen_tol`` the basis is
    replaced by the unitary rotation that best matches the previous vectors
    (orthogonal Procrustes). Each column's phase is then chosen so that its
    overlap with the previous vector is real and positive. Returns the number
    of columns whose overlap magnitude fell below 1/2 (a branch change).
    """
    n = vs.shape[0]
    m = vs.shape[1]
    i = 0
    while i < m:
        j = i + 1
        while j < m and abs(w[i] - w[j]) <= degen_tol:
            j += 1
        k = j - i
        if k > 1:
            o = np.empty((k, k), dtype=np.complex128)
            for x in range(k):
                for y in range(k):
                    acc = 0j
                    for t in range(n):
                        acc += np.conj(vs[t, i + x]) * prev[t, i + y]
                    o[x, y] = acc
            u, sv, vh = np.linalg.svd(o)
            rot = u @ vh
            block = np.empty((n, k), dtype=np.complex128)
            for t in range(n):
                for y in range(k):
                    acc = 0j
                    for x in range(k):
                        acc += vs[t, i + x] * rot[x, y]
                    block[t, y] = acc
            for t in range(n):
                for y in range(k):
                    vs[t, i + y] = block[t, y]
        i = j
    jumps = 0
    for a in range(m):
        ov = 0j
        for t in range(n):
            ov += np.conj(prev[t, a]) * vs[t, a]
        mag = abs(ov)
        if mag < 0.5:
            jumps += 1
        if mag > 0.0:
            ph = np.conj(ov) / mag
            for t in range(n):
                vs[t, a] = vs[t, a] * ph
    return jumps


@njit(cache=True)
def hamiltonian_into(r, sh, m, omega, sign, naxis, out):
    c0 = r[1] * sh[2] - r[2] * sh[1]
    c1 = r[2] * sh[0] - r[0] * sh[2]
    c2 = r[0] * sh[1] - r[1] * sh[0]
    nrm = np.sqrt(c0 * c0 + c1 * c1 + c2 * c2)
    if nrm * np.exp(m) > DEGENERACY_THRESHOLD:
        f = sign * omega / nrm
        out[0] = f * c0
        out[1] = f * c1
        out[2] = f * c2
    else:
        out[0] = omega * naxis[0]
        out[1] = omega * naxis[1]
        out[2] = omega * naxis[2]


@njit(cache=True)
def qubit_fields_into(r, s, h, lvecs, dr, ds):
    """Bloch-form master field (into ``dr``) and adjoint field (into ``ds``).

    ``lvecs`` holds one Lindblad vector per column.
    """
    dr[0] = h[1] * r[2] - h[2] * r[1]
    dr[1] = h[2] * r[0] - h[0] * r[2]
    dr[2] = h[0] * r[1] - h[1] * r[0]
    ds[0] = h[1] * s[2] - h[2] * s[1]
    ds[1] = h[2] * s[0] - h[0] * s[2]
    ds[2] = h[0] * s[1] - h[1] * s[0]
    for a in range(lvecs.shape[1]):
        l0 = lvecs[0, a]
        l1 = lvecs[1, a]
        l2 = lvecs[2, a]
        lsq = abs(l0) ** 2 + abs(l1) ** 2 + abs(l2) ** 2
        if lsq == 0.0:
            continue
        lr = l0 * r[0] + l1 * r[1] + l2 * r[2]
        lsd = l0 * s[0] + l1 * s[1] + l2 * s[2]
        # i l x l* = 2 Re(l) x Im(l)
        x0 = 2.0 * (l1.real * l2.imag - l2.real * l1.imag)
        x1 = 2.0 * (l2.real * l0.imag - l0.real * l2.imag)
        x2 = 2.0 * (l0.real * l1.imag - l1.real * l0.imag)
        dr[0] += (lr * np.conj(l0)).real - lsq * r[0] + x0
        dr[1] += (lr * np.conj(l1)).real - lsq * r[1] + x1
        dr[2] += (lr * np.conj(l2)).real - lsq * r[2] + x2
        ds[0] -= (lsd * np.conj(l0)).real - lsq * s[0]
        ds[1] -= (lsd * np.conj(l1)).real - lsq * s[1]
        ds[2] -= (lsd * np.conj(l2)).real - lsq * s[2]
    for j in range(3):
        dr[j] *= 2.0
        ds[j] *= 2.0


@njit(cache=True)
def _optimal_deriv(y, omega, sign, gammas, naxis, kmat, work, v, w, vs, lvecs, h, dr, ds, out):
    # y = (r, unit costate direction, log |s|)
    r = y[0:3]
    sh = y[3:6]
    hamiltonian_into(r, sh, y[6], omega, sign, naxis, h)
    k_matrix_into(r, sh, kmat)
    eig3_desc_into(kmat, work, v, w, vs)
    for a in range(3):
        for j in range(3):
            lvecs[j, a] = gammas[a] * vs[j, a]
    qubit_fields_into(r, sh, h, lvecs, dr, ds)
    mu = sh[0] * ds[0] + sh[1] * ds[1] + sh[2] * ds[2]
    for j in range(3):
        out[j] = dr[j]
        out[3 + j] = ds[j] - mu * sh[j]
    out[6] = mu


@njit(cache=True)
def integrate_optimal_qubit(y0, omega, sign, gammas, naxis, dt, nsteps, stride, cons_tol, norm_tol):
    """Fixed-step RK4 for the coupled state/costate one-qubit equations.

    The costate is carried as a unit direction plus its log-magnitude: the
    optimal controls depend only on the costate direction and the adjoint
    equation is linear, so this is the same flow, but the conserved vector
    r x s stays accurate while |s| grows exponentially.
    """
    nsamp = nsteps // stride + 1
    R = np.zeros((nsamp, 3))
    S = np.zeros((nsamp, 3))
    H = np.zeros((nsamp, 3))
    L = np.zeros((nsamp, 3, 3), dtype=np.complex128)
    NU = np.zeros((nsamp, 3))
    C = np.zeros((nsamp, 3))

    kmat = np.empty((3, 3), dtype=np.complex128)
    work = np.empty((3, 3), dtype=np.complex128)
    v = np.empty((3, 3), dtype=np.complex128)
    vs = np.empty((3, 3), dtype=np.complex128)
    prev = np.empty((3, 3), dtype=np.complex128)
    lvecs = np.empty((3, 3), dtype=np.complex128)
    w = np.empty(3)
    h = np.empty(3)
    dr = np.empty(3)
    ds = np.empty(3)
    k1 = np.empty(7)
    k2 = np.empty(7)
    k3 = np.empty(7)
    k4 = np.empty(7)
    yt = np.empty(7)
    y = y0.copy()

    c00 = y[1] * y[5] - y[2] * y[4]
    c01 = y[2] * y[3] - y[0] * y[5]
    c02 = y[0] * y[4] - y[1] * y[3]
    scale0 = np.exp(y[6])
    c00 *= scale0
    c01 *= scale0
    c02 *= scale0

    max_drift = 0.0
    max_eig_res = 0.0
    max_norm = 0.0
    jumps = 0
    status = STATUS_OK
    n_rec = 0
    step = 0
    while True:
        if step % stride == 0:
            # record sample: controls at the sample point, continuity-aligned
            r = y[0:3]
            sh = y[3:6]
            sc = np.exp(y[6])
            hamiltonian_into(r, sh, y[6], omega, sign, naxis, h)
            k_matrix_into(r, sh, kmat)
            eig3_desc_into(kmat, work, v, w, vs)
            degen_tol = 1e-9 * max(1.0, abs(w[0]), abs(w[2]))
            if n_rec == 0:
                canonical_phase(vs)
            else:
                jumps += align_columns(vs, w, prev, degen_tol)
            for a in range(3):
                res = 0.0
                for i in range(3):
                    acc = 0j
                    for j in range(3):
                        acc += kmat[i, j] * vs[j, a]
                    res += abs(acc - w[a] * vs[i, a]) ** 2
                res = np.sqrt(res)
                if res > max_eig_res:
                    max_eig_res = res
                for i in range(3):
                    prev[i, a] = vs[i, a]
                    L[n_rec, i, a] = gammas[a] * vs[i, a]
                NU[n_rec, a] = w[a] * sc
            for j in range(3):
                R[n_rec, j] = r[j]
                S[n_rec, j] = sc * sh[j]
                H[n_rec, j] = h[j]
            C[n_rec, 0] = sc * (r[1] * sh[2] - r[2] * sh[1])
            C[n_rec, 1] = sc * (r[2] * sh[0] - r[0] * sh[2])
            C[n_rec, 2] = sc * (r[0] * sh[1] - r[1] * sh[0])
            n_rec += 1
        if step == nsteps:
            break

        _optimal_deriv(y, omega, sign, gammas, naxis, kmat, work, v, w, vs, lvecs, h, dr, ds, k1)
        for j in range(7):
            yt[j] = y[j] + 0.5 * dt * k1[j]
        _optimal_deriv(yt, omega, sign, gammas, naxis, kmat, work, v, w, vs, lvecs, h, dr, ds, k2)
        for j in range(7):
            yt[j] = y[j] + 0.5 * dt * k2[j]
        _optimal_deriv(yt, omega, sign, gammas, naxis, kmat, work, v, w, vs, lvecs, h, dr, ds, k3)
        for j in range(7):
            yt[j] = y[j] + dt * k3[j]
        _optimal_deriv(yt, omega, sign, gammas, naxis, kmat, work, v, w, vs, lvecs, h, dr, ds, k4)
        for j in range(7):
            y[j] = y[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
        step += 1

        finite = True
        for j in range(7):
            if not np.isfinite(y[j]):
                finite = False
        if not finite:
            status = STATUS_NONFINITE
            break
        rn = np.sqrt(y[0] ** 2 + y[1] ** 2 + y[2] ** 2)
        if rn > max_norm:
            max_norm = rn
        sc = np.exp(y[6])
        d0 = sc * (y[1] * y[5] - y[2] * y[4]) - c00
        d1 = sc * (y[2] * y[3] - y[0] * y[5]) - c01
        d2 = sc * (y[0] * y[4] - y[1] * y[3]) - c02
        drift = np.sqrt(d0 * d0 + d1 * d1 + d2 * d2)
        if drift > max_drift:
            max_drift = drift
        if drift > cons_tol:
            status = STATUS_DRIFT
            break
        if rn > 1.0 + norm_tol:
            status = STATUS_NORM
            break

    return R, S, H, L, NU, C, n_rec, step, status, max_drift, max_eig_res, max_norm, jumps
