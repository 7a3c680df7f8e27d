"""Zero-forcing beamformers for the P and D slots and per-stream power allocation.

Beamformers are returned as the columns of a K x K matrix: column ``k`` is the
direction of user ``k + 1``'s stream. In the D slot column 0 carries the
artificial noise instead of a data stream.
"""
from dataclasses import dataclass

import numpy as np

from ._accel import NUMBA_ENABLED, njit
from .channel import CsitState
from .errors import InvalidPower, RankDeficient
from .linalg import (
    PHASE_ATOL,
    RANK_RTOL,
    _householder_null_nb,
    _normalize_phase_nb,
    _normalize_phase_py,
    null_space_basis,
    null_space_unit_vector,
)

POLICIES = ("half_noise", "equal")


@dataclass(frozen=True)
class StreamRole:
    kind: str  # "data" or "noise"
    user: int = 0  # 1-based receiver index; 0 for noise
    tag: str = ""  # "a" (P slot) or "b" (D slot)

    def __str__(self):
        return "u" if self.kind == "noise" else f"{self.tag}{self.user}"


ARTIFICIAL_NOISE = StreamRole("noise")


@dataclass(frozen=True)
class StreamPowers:
    """Transmit power per stream, linear units.

    ``p_slot[k]`` feeds ``a_{k+1}``; ``d_data[k]`` feeds ``b_{k+2}``.
    """

    p_slot: np.ndarray
    d_data: np.ndarray
    d_noise: float

    @property
    def users(self):
        return self.p_slot.shape[0]

    def source_variances(self):
        """Variances of the stacked source ``(a_1..a_K, b_2..b_K, u)``."""
        return np.concatenate([self.p_slot, self.d_data, [self.d_noise]])

    def scaled(self, factor):
        return StreamPowers(self.p_slot * factor, self.d_data * factor, self.d_noise * factor)


def allocate_powers(K, P_total, policy="half_noise", artificial_noise=True):
    """Split ``P_total`` across the streams of each slot.

    ``half_noise`` gives the artificial noise half the D-slot budget and shares
    the rest equally among the K - 1 data streams; ``equal`` shares the D-slot
    budget equally among all K streams. Without artificial noise the D-slot
    data streams share the whole budget.
    """
    if not P_total > 0:
        raise InvalidPower("P_total must be > 0")
    if policy not in POLICIES:
        raise ValueError(f"unknown power policy {policy!r}")
    p_slot = np.full(K, P_total / K)
    if not artificial_noise:
        return StreamPowers(p_slot, np.full(K - 1, P_total / (K - 1)), 0.0)
    if policy == "half_noise":
        noise = P_total / 2.0
    else:
        noise = P_total / K
    return StreamPowers(p_slot, np.full(K - 1, (P_total - noise) / (K - 1)), noise)


def _check_gain(v, h_row, user):
    h_norm = np.linalg.norm(h_row)
    if abs(h_row @ v) <= RANK_RTOL * h_norm:
        raise RankDeficient(f"user {user} has no gain on its own beamformer")


def build_p_state_precoder(view):
    """One beamformer per user, each nulled at every other receiver."""
    if view.state is not CsitState.P_ALL:
        raise ValueError("P-state precoder needs a P_ALL view")
    H = view.rows
    K = view.users
    V = np.empty((K, K), dtype=np.complex128)
    for k in range(K):
        V[:, k] = null_space_unit_vector(np.delete(H, k, axis=0))
        _check_gain(V[:, k], H[k], k + 1)
    return V


def project_onto_null(rows, h_row):
    """Unit vector maximising ``|h_row @ v|`` over the null space of ``rows``."""
    basis = null_space_basis(rows)
    target = np.conj(h_row)
    v = basis @ (basis.conj().T @ target)
    nrm = np.linalg.norm(v)
    if nrm <= RANK_RTOL * np.linalg.norm(h_row):
        raise RankDeficient("channel lies in the span of the nulled rows")
    return _normalize_phase_py(v / nrm)


def build_d_state_precoder(view):
    """Noise direction plus K - 1 data beamformers from rows 2..K only.

    Column 0 nulls every receiver but the first. Column ``k`` (user k + 1 >= 2)
    nulls receivers ``{2..K} \\ {k + 1}`` and, inside that null space, points as
    close as possible to its own receiver's channel.
    """
    if view.state is not CsitState.D_FIRST:
        raise ValueError("D-state precoder needs a D_FIRST view")
    K = view.users
    rows = view.rows  # users 2..K
    V = np.empty((K, K), dtype=np.complex128)
    V[:, 0] = null_space_unit_vector(rows)
    for k in range(1, K):
        others = np.delete(rows, k - 1, axis=0)
        V[:, k] = project_onto_null(others, rows[k - 1])
    return V


@dataclass(frozen=True)
class BlockPrecoder:
    p_vectors: np.ndarray
    d_vectors: np.ndarray
    powers: StreamPowers

    @property
    def users(self):
        return self.p_vectors.shape[0]

    def roles(self):
        K = self.users
        p_roles = tuple(StreamRole("data", k + 1, "a") for k in range(K))
        d_roles = (ARTIFICIAL_NOISE,) + tuple(StreamRole("data", k + 1, "b") for k in range(1, K))
        return p_roles, d_roles


def build_block_precoder(p_view, d_view, powers):
    return BlockPrecoder(build_p_state_precoder(p_view), build_d_state_precoder(d_view), powers)


# ---------------------------------------------------------------------------
# batched kernels: many draws at once for the Monte Carlo sweeps
# ---------------------------------------------------------------------------


@njit
def _precoders_loop(H_p, rows_d):
    n_draws, K, _ = H_p.shape
    Vp = np.zeros((n_draws, K, K), dtype=np.complex128)
    Vd = np.zeros((n_draws, K, K), dtype=np.complex128)
    ok = np.ones(n_draws, dtype=np.bool_)
    for t in range(n_draws):
        H = H_p[t]
        for k in range(K):
            sub = np.empty((K - 1, K), dtype=np.complex128)
            r = 0
            for j in range(K):
                if j != k:
                    sub[r] = H[j]
                    r += 1
            q, rank, _ = _householder_null_nb(sub)
            if rank < K - 1:
                ok[t] = False
            v = _normalize_phase_nb(np.ascontiguousarray(q[:, K - 1]))
            if abs(np.sum(H[k] * v)) <= RANK_RTOL * np.sqrt(np.sum(np.abs(H[k]) ** 2)):
                ok[t] = False
            Vp[t, :, k] = v
        R = rows_d[t]
        q, rank, _ = _householder_null_nb(R)
        if rank < K - 1:
            ok[t] = False
        Vd[t, :, 0] = _normalize_phase_nb(np.ascontiguousarray(q[:, K - 1]))
        for k in range(1, K):
            sub = np.empty((K - 2, K), dtype=np.complex128)
            r = 0
            for j in range(K - 1):
                if j != k - 1:
                    sub[r] = R[j]
                    r += 1
            q, rank, _ = _householder_null_nb(sub)
            if rank < K - 2:
                ok[t] = False
            basis = np.ascontiguousarray(q[:, rank:])
            target = np.conj(R[k - 1])
            coef = np.conj(basis).T @ target
            v = basis @ coef
            nrm = np.sqrt(np.sum(np.abs(v) ** 2))
            if nrm <= RANK_RTOL * np.sqrt(np.sum(np.abs(target) ** 2)):
                ok[t] = False
                nrm = 1.0
            Vd[t, :, k] = _normalize_phase_nb(v / nrm)
    return Vp, Vd, ok


def normalize_phase_columns(V):
    """Vectorised phase convention over the columns of a stack of matrices."""
    V = np.array(V, dtype=np.complex128, copy=True)
    mag = np.abs(V)
    first = np.argmax(mag > PHASE_ATOL, axis=-2)  # (..., ncols)
    pivot = np.take_along_axis(V, first[..., None, :], axis=-2)
    pmag = np.abs(pivot)
    rot = np.where(pmag > PHASE_ATOL, np.conj(pivot) / np.where(pmag > 0, pmag, 1.0), 1.0)
    return V * rot


def precoders_numpy(H_p, rows_d):
    """Vectorised beamformers: inverse columns, SVD null vectors and projections."""
    H_p = np.asarray(H_p, dtype=np.complex128)
    rows_d = np.asarray(rows_d, dtype=np.complex128)
    n_draws, K, _ = H_p.shape
    s = np.linalg.svd(H_p, compute_uv=False)
    ok = s[:, -1] > RANK_RTOL * s[:, 0]
    safe = np.where(ok[:, None, None], H_p, np.eye(K))
    inv = np.linalg.inv(safe)
    Vp = inv / np.linalg.norm(inv, axis=1, keepdims=True)

    _, sd, vh = np.linalg.svd(rows_d, full_matrices=True)
    ok &= sd[:, -1] > RANK_RTOL * sd[:, 0]
    Vd = np.empty((n_draws, K, K), dtype=np.complex128)
    Vd[:, :, 0] = np.conj(vh[:, -1, :])
    eye = np.eye(K)
    for k in range(1, K):
        others = np.delete(rows_d, k - 1, axis=1)  # (n, K-2, K)
        target = np.conj(rows_d[:, k - 1, :])[..., None]
        if K > 2:
            gram = others @ np.conj(np.swapaxes(others, -1, -2))
            proj = eye - np.conj(np.swapaxes(others, -1, -2)) @ np.linalg.solve(gram, others)
            v = (proj @ target)[..., 0]
        else:
            v = target[..., 0]
        nrm = np.linalg.norm(v, axis=-1)
        good = nrm > RANK_RTOL * np.linalg.norm(target[..., 0], axis=-1)
        ok &= good
        Vd[:, :, k] = v / np.where(good, nrm, 1.0)[:, None]
    return normalize_phase_columns(Vp), normalize_phase_columns(Vd), ok


def precoders_numba(H_p, rows_d):
    H_p = np.ascontiguousarray(H_p, dtype=np.complex128)
    rows_d = np.ascontiguousarray(rows_d, dtype=np.complex128)
    return _precoders_loop(H_p, rows_d)


def precoders_batch(H_p, rows_d):
    """Beamformers for a stack of draws.

    Parameters
    ----------
    H_p : (n, K, K) complex
        P-slot channels.
    rows_d : (n, K - 1, K) complex
        D-slot rows of users 2..K. Receiver 1's D-slot row is never passed in.

    Returns
    -------
    Vp, Vd : (n, K, K) complex
    ok : (n,) bool, False where a draw is numerically degenerate
    """
    if NUMBA_ENABLED:
        return precoders_numba(H_p, rows_d)
    return precoders_numpy(H_p, rows_d)
