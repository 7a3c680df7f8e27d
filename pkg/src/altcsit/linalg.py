"""Small complex linear-algebra kernel: null spaces and log-determinants.

Null spaces come from a column-pivoted Householder factorisation of ``A^H``.
Hermitian log-determinants use a hand-rolled Cholesky factorisation; covariances
of the form ``I + F F^H`` go through the singular values of ``F`` instead. The
kernels are written once in numba-compatible numpy and compiled when enabled.
"""
import math

import numpy as np

from ._accel import NUMBA_ENABLED, njit
from .errors import DimensionError, NotHermitian, NotPositiveDefinite, RankDeficient

RANK_RTOL = 1e-10
PHASE_ATOL = 1e-12
HERMITIAN_RTOL = 1e-12


def as_complex_matrix(a, name="A"):
    """Validate ``a`` as a finite 2-D complex matrix and return a complex128 copy."""
    m = np.array(a, dtype=np.complex128, copy=True)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {m.shape}")
    if m.shape[1] == 0:
        raise DimensionError(f"{name} must have at least one column")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains NaN or Inf")
    return m


def _normalize_phase_py(v):
    # First entry with magnitude above PHASE_ATOL becomes real positive.
    for i in range(v.shape[0]):
        mag = abs(v[i])
        if mag > PHASE_ATOL:
            rot = np.conj(v[i]) / mag
            for j in range(v.shape[0]):
                v[j] = v[j] * rot
            v[i] = mag
            return v
    return v


def _householder_null_py(a):
    """Null space of ``a`` (m x n, m <= n) from pivoted Householder QR of ``a^H``.

    Returns ``(q, rank, rmax)``: the n x n unitary factor, the numerical rank and
    the largest pivot norm. Columns ``q[:, rank:]`` span the null space of ``a``
    in ascending pivot order.
    """
    m = a.shape[0]
    n = a.shape[1]
    r = np.ascontiguousarray(np.conj(a).T)
    q = np.eye(n, dtype=np.complex128)
    rank = 0
    rmax = 0.0
    for j in range(m):
        # recompute remaining column norms from scratch; matrices are tiny
        p = j
        best = -1.0
        for c in range(j, m):
            s = 0.0
            for i in range(j, n):
                s += r[i, c].real * r[i, c].real + r[i, c].imag * r[i, c].imag
            if s > best:
                best = s
                p = c
        if p != j:
            tmp = r[:, j].copy()
            r[:, j] = r[:, p]
            r[:, p] = tmp
        nrm = math.sqrt(best)
        if j == 0:
            rmax = nrm
        if nrm == 0.0 or nrm <= RANK_RTOL * rmax:
            break
        rank += 1
        x0 = r[j, j]
        ax0 = abs(x0)
        phase = x0 / ax0 if ax0 > 0.0 else 1.0 + 0.0j
        v = r[j:, j].copy()
        v[0] = v[0] + phase * nrm
        vn = math.sqrt(np.sum(v.real * v.real + v.imag * v.imag))
        v = v / vn
        for c in range(j, m):
            w = np.sum(np.conj(v) * r[j:, c])
            r[j:, c] = r[j:, c] - 2.0 * w * v
        for i in range(n):
            w = np.sum(q[i, j:] * v)
            q[i, j:] = q[i, j:] - 2.0 * w * np.conj(v)
    return q, rank, rmax


def _cholesky_log2det_py(mat):
    """``log2 det`` of a Hermitian PD matrix; ``ok`` is False on a non-positive pivot."""
    n = mat.shape[0]
    low = np.zeros((n, n), dtype=np.complex128)
    acc = 0.0
    for j in range(n):
        d = mat[j, j].real
        for k in range(j):
            d -= low[j, k].real * low[j, k].real + low[j, k].imag * low[j, k].imag
        if not d > 0.0:
            return np.nan, False
        ljj = math.sqrt(d)
        low[j, j] = ljj
        acc += math.log(ljj)
        for i in range(j + 1, n):
            s = mat[i, j]
            for k in range(j):
                s -= low[i, k] * np.conj(low[j, k])
            low[i, j] = s / ljj
    return 2.0 * acc / math.log(2.0), True


_normalize_phase_nb = njit(_normalize_phase_py)
_householder_null_nb = njit(_householder_null_py)
_cholesky_log2det_nb = njit(_cholesky_log2det_py)

if NUMBA_ENABLED:
    householder_null = _householder_null_nb
    cholesky_log2det = _cholesky_log2det_nb
    normalize_phase = _normalize_phase_nb
else:
    householder_null = _householder_null_py
    cholesky_log2det = _cholesky_log2det_py
    normalize_phase = _normalize_phase_py


def _null_basis_with_rank(a):
    m, n = a.shape
    if m > n:
        raise DimensionError(f"need rows <= cols, got {m}x{n}")
    q, rank, _ = householder_null(a)
    basis = np.array(q[:, rank:], copy=True)
    for c in range(basis.shape[1]):
        col = np.ascontiguousarray(basis[:, c])
        basis[:, c] = normalize_phase(col)
    return basis, rank


def null_space_basis(a):
    """Orthonormal basis of the numerical null space of ``a``.

    Parameters
    ----------
    a : array_like, shape (m, n) with m <= n
        A matrix with no rows (shape ``(0, n)``) has the whole space as null space.

    Returns
    -------
    ndarray, shape (n, n - rank)
        Columns are orthonormal, ordered by ascending pivot, each with its first
        non-negligible entry real and positive.
    """
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim == 2 and a.shape[0] == 0 and a.shape[1] > 0:
        m = np.zeros((0, a.shape[1]), dtype=np.complex128)
    else:
        m = as_complex_matrix(a)
    basis, _ = _null_basis_with_rank(m)
    return basis


def null_space_unit_vector(a):
    """Unit vector ``v`` with ``a @ v = 0`` for a full-row-rank ``a`` with rows < cols."""
    m = as_complex_matrix(a)
    rows, cols = m.shape
    if rows >= cols:
        raise DimensionError(f"need rows < cols, got {rows}x{cols}")
    basis, rank = _null_basis_with_rank(m)
    if rank < rows:
        raise RankDeficient(f"numerical rank {rank} < {rows} rows")
    return basis[:, 0]


def log_det_hermitian_pd(mat):
    """Base-2 log-determinant of a Hermitian positive definite matrix."""
    m = as_complex_matrix(mat, "M")
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"M must be square, got {m.shape}")
    scale = max(1.0, float(np.max(np.abs(m))))
    if np.max(np.abs(m - m.conj().T)) > HERMITIAN_RTOL * scale:
        raise NotHermitian("M is not Hermitian")
    value, ok = cholesky_log2det(m)
    if not ok:
        raise NotPositiveDefinite("non-positive Cholesky pivot")
    return float(value)


def _log2det_identity_plus_gram_py(f):
    # det(I + F F^H) from singular values of F; never forms the covariance
    s = np.linalg.svd(f)[1]
    acc = 0.0
    for i in range(s.shape[0]):
        acc += math.log2(1.0 + s[i] * s[i])
    return acc


_log2det_identity_plus_gram_nb = njit(_log2det_identity_plus_gram_py)


def _log2det_whitened_gain_py(f_base, f_extra):
    # whiten f_extra by (I + F_b F_b^H)^(-1/2) through the SVD of F_b, then
    # take singular values; no difference of large log-determinants is formed
    u, s, _ = np.linalg.svd(f_base)
    w = np.conj(u).T @ f_extra
    for i in range(s.shape[0]):
        w[i, :] = w[i, :] / math.sqrt(1.0 + s[i] * s[i])
    sv = np.linalg.svd(w)[1]
    acc = 0.0
    for i in range(sv.shape[0]):
        acc += math.log2(1.0 + sv[i] * sv[i])
    return acc


_log2det_whitened_gain_nb = njit(_log2det_whitened_gain_py)


def log_det_whitened_gain(f_base, f_extra):
    """``log2 det(I + F_b F_b^H + F_e F_e^H) - log2 det(I + F_b F_b^H)`` without cancellation.

    Equal to ``log2 det(I + F_e^H (I + F_b F_b^H)^-1 F_e)``, which keeps full
    relative precision when the difference is tiny next to either term.
    """
    fb = np.ascontiguousarray(f_base, dtype=np.complex128)
    fe = np.ascontiguousarray(f_extra, dtype=np.complex128)
    if fb.ndim != 2 or fe.ndim != 2 or fb.shape[0] != fe.shape[0]:
        raise DimensionError("F_b and F_e must be 2-D with the same number of rows")
    if fb.shape[0] == 0 or fe.shape[1] == 0:
        return 0.0
    if fb.shape[1] == 0:
        return log_det_identity_plus_gram(fe)
    if NUMBA_ENABLED:
        return float(_log2det_whitened_gain_nb(fb, fe))
    return float(_log2det_whitened_gain_py(fb, fe))


def log_det_identity_plus_gram(f):
    """``log2 det(I + F F^H)`` computed from the singular values of ``F``.

    Working on the square-root factor keeps unit eigenvalues exact even when
    other eigenvalues of ``F F^H`` are 1e14 times larger.
    """
    m = np.ascontiguousarray(f, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionError("F must be 2-D")
    if m.size == 0:
        return 0.0
    if NUMBA_ENABLED:
        return float(_log2det_identity_plus_gram_nb(m))
    return float(_log2det_identity_plus_gram_py(m))
