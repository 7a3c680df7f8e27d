"""Independent reference computations used only by the tests.

None of these share code with the package: null spaces come from classical
Gram-Schmidt, determinants from cofactor expansion, mutual information from
dense joint covariances and ``numpy.linalg.slogdet``.
"""
import math

import numpy as np


def random_complex(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def phase_fix(v, atol=1e-12):
    v = np.array(v, dtype=complex)
    for x in v:
        if abs(x) > atol:
            return v * (np.conj(x) / abs(x))
    return v


def gram_schmidt_null(a, tol=1e-8):
    """Orthonormal basis of ``{v : a v = 0}``.

    Orthonormalise the conjugated rows of ``a`` (they span the orthogonal
    complement of the null space), then orthonormalise the standard basis
    against them and keep the directions that survive.
    """
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    n = a.shape[1]
    span = []
    for row in np.conj(a):
        w = row.copy()
        for _ in range(2):
            for q in span:
                w = w - np.vdot(q, w) * q
        nrm = np.linalg.norm(w)
        if nrm > tol:
            span.append(w / nrm)
    out = []
    for i in range(n):
        w = np.zeros(n, dtype=complex)
        w[i] = 1.0
        for _ in range(2):
            for q in span + out:
                w = w - np.vdot(q, w) * q
        nrm = np.linalg.norm(w)
        if nrm > tol:
            out.append(w / nrm)
    return out


def cofactor_det(m):
    m = np.asarray(m, dtype=complex)
    n = m.shape[0]
    if n == 1:
        return m[0, 0]
    total = 0j
    for j in range(n):
        minor = np.delete(np.delete(m, 0, axis=0), j, axis=1)
        total += (-1) ** j * m[0, j] * cofactor_det(minor)
    return total


def dense_leakage(G, variances, target_idx):
    """``I(w; y)`` for ``y = G s + n`` with ``w = s[target_idx]`` via the joint covariance."""
    G = np.asarray(G, dtype=complex)
    var = np.asarray(variances, dtype=float)
    n_obs = G.shape[0]
    idx = list(target_idx)
    keep = [i for i in idx if var[i] > 0]
    if not keep or n_obs == 0:
        return 0.0
    cov_s = np.diag(var).astype(complex)
    cov_y = G @ cov_s @ G.conj().T + np.eye(n_obs)
    cov_w = cov_s[np.ix_(keep, keep)]
    cross = cov_s[keep, :] @ G.conj().T  # Cov(w, y)
    joint = np.block([[cov_w, cross], [cross.conj().T, cov_y]])
    ld = lambda m: np.linalg.slogdet(m)[1] / math.log(2.0)
    return float(ld(cov_w) + ld(cov_y) - ld(joint))


def block_observation_map(gp, gd, observers):
    """Observation rows of the listed receivers (1-based) over both slots."""
    K = gp.shape[0]
    rows = []
    for j in observers:
        p_row = np.zeros(2 * K, dtype=complex)
        p_row[:K] = gp[j - 1]
        d_row = np.zeros(2 * K, dtype=complex)
        d_row[K : 2 * K - 1] = gd[j - 1, 1:]
        d_row[2 * K - 1] = gd[j - 1, 0]
        rows += [p_row, d_row]
    return np.array(rows).reshape(-1, 2 * K)


def message_indices(K, k):
    return [k - 1] + ([K + k - 2] if k >= 2 else [])


def dense_leakage_mp(G, variances, target_idx, dps=50):
    """Same joint-covariance formula as :func:`dense_leakage` in ``dps``-digit arithmetic."""
    import mpmath

    with mpmath.workdps(dps):
        G = mpmath.matrix([[mpmath.mpc(complex(x)) for x in row] for row in np.atleast_2d(G)])
        n_obs, n_src = G.rows, G.cols
        keep = [i for i in target_idx if variances[i] > 0]
        if not keep or n_obs == 0:
            return 0.0
        cov_s = mpmath.diag([mpmath.mpf(float(v)) for v in variances])
        gh = G.transpose_conj()
        cov_y = G * cov_s * gh + mpmath.eye(n_obs)
        m = len(keep)
        joint = mpmath.zeros(m + n_obs)
        cross = mpmath.zeros(m, n_obs)
        for a, i in enumerate(keep):
            for b in range(n_obs):
                cross[a, b] = cov_s[i, i] * gh[i, b]
        for a, i in enumerate(keep):
            for b, j in enumerate(keep):
                joint[a, b] = cov_s[i, j]
            for b in range(n_obs):
                joint[a, m + b] = cross[a, b]
                joint[m + b, a] = mpmath.conj(cross[a, b])
        for a in range(n_obs):
            for b in range(n_obs):
                joint[m + a, m + b] = cov_y[a, b]
        cov_w = mpmath.diag([cov_s[i, i] for i in keep])
        ld = lambda x: mpmath.log(mpmath.re(mpmath.det(x)), 2)
        return float(ld(cov_w) + ld(cov_y) - ld(joint))
