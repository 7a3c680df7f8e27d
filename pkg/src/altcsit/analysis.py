"""Exact Gaussian rates, leakage, SDoF slope fits, the SEP check and power audits.

All information quantities are in bits. The stacked source vector of a block is
``s = (a_1..a_K, b_2..b_K, u)``; receiver ``j`` observes one linear combination
of ``s`` per slot plus unit-variance noise, so every rate and leakage value is
a log-determinant of a small covariance matrix.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from ._accel import NUMBA_ENABLED, njit
from .errors import InsufficientPoints, InvalidPower
from .linalg import _log2det_whitened_gain_nb, log_det_whitened_gain


def user_rate(gain, p_stream, interference_plus_noise_power):
    """``log2(1 + p |g|^2 / (I + N))`` in bits per slot."""
    if p_stream < 0:
        raise InvalidPower("p_stream must be >= 0")
    if not interference_plus_noise_power > 0:
        raise InvalidPower("interference_plus_noise_power must be > 0")
    return math.log2(1.0 + p_stream * abs(gain) ** 2 / interference_plus_noise_power)


def secrecy_pairs(K):
    """``(k, observers)`` for every confidential message: W_k hidden from receivers 1..k-1."""
    return [(k, tuple(range(1, k))) for k in range(2, K + 1)]


def pair_key(k, observers):
    """Column suffix ``{k}_{mask}``; bit ``j - 1`` of the mask marks receiver ``j``."""
    mask = sum(1 << (j - 1) for j in observers)
    return f"{k}_{mask}"


@dataclass(frozen=True)
class RatePoint:
    P: float
    per_user_rate: np.ndarray
    sum_rate: float
    leakage: dict = field(default_factory=dict)  # pair_key -> bits per block
    trials: int = 1

    @property
    def snr_db(self):
        return 10.0 * math.log10(self.P)


@dataclass(frozen=True)
class SdofFit:
    slope: float
    intercept: float
    r_squared: float
    points_used: int


# ---------------------------------------------------------------------------
# rates
# ---------------------------------------------------------------------------


def rates_batch(gp, gd, powers):
    """Per-user rates in bits per channel use for a stack of gain tables.

    ``gp`` and ``gd`` have shape ``(n, K, K)``. Interference uses the actual
    residual gains, so imperfect nulling shows up as lost rate.
    """
    gp = np.asarray(gp)
    gd = np.asarray(gd)
    K = gp.shape[-1]
    pa = powers.p_slot
    pd = np.concatenate([[powers.d_noise], powers.d_data])
    rx_p = np.abs(gp) ** 2 * pa
    sig_p = np.diagonal(rx_p, axis1=-2, axis2=-1)
    rate_p = np.log2(1.0 + sig_p / (rx_p.sum(axis=-1) - sig_p + 1.0))
    rx_d = np.abs(gd) ** 2 * pd
    sig_d = np.diagonal(rx_d, axis1=-2, axis2=-1).copy()
    sig_d[..., 0] = 0.0  # receiver 1 has no D-slot stream
    rate_d = np.log2(1.0 + sig_d / (rx_d.sum(axis=-1) - sig_d + 1.0))
    per_user = (rate_p + rate_d) / 2.0
    if per_user.shape[-1] != K:
        raise ValueError("gain tables must be square")
    return per_user


def block_rates(gains, powers, with_leakage=True):
    """Rates (and optionally leakage per secrecy pair) for one block.

    Block totals are divided by the two slots of the block.
    """
    per_user = rates_batch(gains.p[None], gains.d[None], powers)[0]
    leakage = {}
    if with_leakage:
        for k, observers in secrecy_pairs(powers.users):
            model = build_block_model(gains, powers, observers)
            leakage[pair_key(k, observers)] = leakage_mi(model, k)
    P = float(np.sum(powers.p_slot))
    return RatePoint(P=P, per_user_rate=per_user, sum_rate=float(per_user.sum()), leakage=leakage)


# ---------------------------------------------------------------------------
# Gaussian block model and leakage
# ---------------------------------------------------------------------------


def source_labels(K):
    return [f"a{k}" for k in range(1, K + 1)] + [f"b{k}" for k in range(2, K + 1)] + ["u"]


def target_indices(K, user):
    """Positions of ``W_user``'s symbols in the stacked source vector."""
    idx = [user - 1]
    if user >= 2:
        idx.append(K + user - 2)
    return idx


@dataclass(frozen=True)
class GaussianBlockModel:
    source_variances: np.ndarray  # (2K,)
    observation_map: np.ndarray  # (n_obs, 2K)
    observers: tuple

    @property
    def users(self):
        return self.source_variances.shape[0] // 2

    def _variances(self, zero):
        var = self.source_variances.astype(float)
        var[list(zero)] = 0.0
        return var

    def factor(self, zero=()):
        """Square-root factor ``F`` with ``covariance = I + F F^H``."""
        return self.observation_map * np.sqrt(self._variances(zero))

    def covariance(self, zero=()):
        G = self.observation_map
        cov = (G * self._variances(zero)) @ G.conj().T + np.eye(G.shape[0])
        return (cov + cov.conj().T) / 2.0


def observation_rows(gp_row, gd_row):
    """Rows of the observation map for one receiver: its P-slot and D-slot outputs."""
    K = gp_row.shape[0]
    rows = np.zeros((2, 2 * K), dtype=np.complex128)
    rows[0, :K] = gp_row
    rows[1, K : 2 * K - 1] = gd_row[1:]
    rows[1, 2 * K - 1] = gd_row[0]
    return rows


def build_block_model(gains, powers, observers):
    """Joint model of the observers' outputs over both slots of a block."""
    rows = [observation_rows(gains.p[j - 1], gains.d[j - 1]) for j in observers]
    G = np.vstack(rows) if rows else np.zeros((0, 2 * powers.users), dtype=np.complex128)
    return GaussianBlockModel(powers.source_variances(), G, tuple(observers))


def leakage_mi(model, target_user):
    """``I(W_k; observations)`` in bits per block.

    Equal to ``log2 det(cov) - log2 det(cov | W_k)``, the conditional covariance
    obtained by zeroing the variance of ``a_k`` and ``b_k``. The difference is
    evaluated as one determinant of the target gain whitened by the conditional
    covariance, so tiny leakage keeps its relative precision at high power.
    """
    if target_user in model.observers:
        raise ValueError("the target receiver cannot observe its own message here")
    if model.observation_map.shape[0] == 0:
        return 0.0
    idx = target_indices(model.users, target_user)
    rest = [i for i in range(2 * model.users) if i not in idx]
    f = model.factor()
    return max(log_det_whitened_gain(f[:, rest], f[:, idx]), 0.0)


def _stack_observation_maps(gp, gd, observers):
    n, K, _ = gp.shape
    obs = np.asarray(observers, dtype=np.int64) - 1
    G = np.zeros((n, 2 * len(obs), 2 * K), dtype=np.complex128)
    G[:, 0::2, :K] = gp[:, obs, :]
    G[:, 1::2, K : 2 * K - 1] = gd[:, obs, 1:]
    G[:, 1::2, 2 * K - 1] = gd[:, obs, 0]
    return G


def _split_columns(K, target_user):
    idx = target_indices(K, target_user)
    rest = [i for i in range(2 * K) if i not in idx]
    return np.asarray(idx, dtype=np.int64), np.asarray(rest, dtype=np.int64)


def leakage_numpy(gp, gd, variances, target_user, observers):
    """Vectorised leakage over draws via batched SVD whitening."""
    gp = np.asarray(gp, dtype=np.complex128)
    gd = np.asarray(gd, dtype=np.complex128)
    K = gp.shape[-1]
    idx, rest = _split_columns(K, target_user)
    F = _stack_observation_maps(gp, gd, observers) * np.sqrt(np.asarray(variances, dtype=float))
    fb, fe = F[..., rest], F[..., idx]
    u, sb, _ = np.linalg.svd(fb, full_matrices=True)
    scale = np.ones(F.shape[:2])
    scale[:, : sb.shape[-1]] = 1.0 / np.sqrt(1.0 + sb**2)
    w = (np.conj(np.swapaxes(u, -1, -2)) @ fe) * scale[..., None]
    sv = np.linalg.svd(w, compute_uv=False)
    return np.maximum(np.sum(np.log2(1.0 + sv**2), axis=-1), 0.0)


@njit
def _leakage_loop(gp, gd, sd, idx, rest, obs):
    n, K, _ = gp.shape
    m = obs.shape[0]
    ns = 2 * K
    out = np.empty(n)
    for t in range(n):
        G = np.zeros((2 * m, ns), dtype=np.complex128)
        for i in range(m):
            j = obs[i]
            for c in range(K):
                G[2 * i, c] = gp[t, j, c]
            for c in range(1, K):
                G[2 * i + 1, K + c - 1] = gd[t, j, c]
            G[2 * i + 1, ns - 1] = gd[t, j, 0]
        F = G * sd
        fb = np.ascontiguousarray(F[:, rest])
        fe = np.ascontiguousarray(F[:, idx])
        out[t] = max(_log2det_whitened_gain_nb(fb, fe), 0.0)
    return out


def leakage_numba(gp, gd, variances, target_user, observers):
    gp = np.ascontiguousarray(gp, dtype=np.complex128)
    gd = np.ascontiguousarray(gd, dtype=np.complex128)
    K = gp.shape[-1]
    sd = np.sqrt(np.ascontiguousarray(variances, dtype=np.float64))
    idx, rest = _split_columns(K, target_user)
    obs = np.asarray(observers, dtype=np.int64) - 1
    return _leakage_loop(gp, gd, sd, idx, rest, obs)


def leakage_batch(gp, gd, variances, target_user, observers):
    """Leakage ``I(W_k; observers)`` per draw for stacks of gain tables."""
    if len(observers) == 0:
        return np.zeros(np.shape(gp)[0])
    if NUMBA_ENABLED:
        return leakage_numba(gp, gd, variances, target_user, observers)
    return leakage_numpy(gp, gd, variances, target_user, observers)


# ---------------------------------------------------------------------------
# slope fitting
# ---------------------------------------------------------------------------


def fit_line(x, y):
    """Ordinary least squares ``y = slope * x + intercept``; returns ``(slope, intercept, r2)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xm = x.mean()
    ym = y.mean()
    dx = x - xm
    sxx = float(dx @ dx)
    slope = float(dx @ (y - ym)) / sxx
    intercept = ym - slope * xm
    resid = y - (slope * x + intercept)
    sst = float((y - ym) @ (y - ym))
    ssr = float(resid @ resid)
    if sst == 0.0:
        r2 = 1.0
    else:
        r2 = min(max(1.0 - ssr / sst, 0.0), 1.0)
    return slope, float(intercept), r2


def fit_sdof(points, min_points=4, min_span_db=40.0, min_trials=100):
    """Fit mean sum rate against ``log2 P``; the slope estimates the sum SDoF."""
    points = list(points)
    if len(points) < min_points:
        raise InsufficientPoints(f"need >= {min_points} points, got {len(points)}")
    snr = [p.snr_db for p in points]
    if max(snr) - min(snr) < min_span_db - 1e-9:
        raise InsufficientPoints(f"points span {max(snr) - min(snr):.1f} dB < {min_span_db} dB")
    if min(p.trials for p in points) < min_trials:
        raise InsufficientPoints(f"each point needs >= {min_trials} channel draws")
    x = np.log2([p.P for p in points])
    y = [p.sum_rate for p in points]
    slope, intercept, r2 = fit_line(x, y)
    return SdofFit(slope=slope, intercept=intercept, r_squared=r2, points_used=len(points))


# ---------------------------------------------------------------------------
# statistical equivalence of actual and virtual receiver 1
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Conditioning:
    """What the conditional variance of receiver 1's D-slot output is conditioned on.

    ``past_outputs`` adds receiver 1's own P-slot output; ``known_streams`` are
    source labels such as ``"a1"`` or ``"b2"`` treated as known.
    """

    past_outputs: bool = True
    known_streams: tuple = ()


@dataclass(frozen=True)
class SepCheck:
    passed: bool
    deviation: float
    std_error: float
    max_abs_per_draw: float
    actual_mean: float
    virtual_mean: float
    draws: int


def conditional_output_variance(g_now, G_past, variances):
    """``Var(y_now | y_past)`` for unit-noise linear Gaussian observations."""
    var_now = float(np.real((g_now * variances) @ g_now.conj())) + 1.0
    if G_past.shape[0] == 0:
        return var_now
    cross = (G_past * variances) @ g_now.conj()
    cov_past = (G_past * variances) @ G_past.conj().T + np.eye(G_past.shape[0])
    return var_now - float(np.real(cross.conj() @ np.linalg.solve(cov_past, cross)))


def _rx1_d_coefficients(h_row, d_vectors):
    K = d_vectors.shape[0]
    g = h_row @ d_vectors
    coeff = np.zeros(2 * K, dtype=np.complex128)
    coeff[K : 2 * K - 1] = g[1:]
    coeff[2 * K - 1] = g[0]
    return coeff


def sep_covariance_check(h_actual, h_virtual, precoder, p_row1, conditioning=Conditioning()):
    """Compare the conditional variance of actual and virtual receiver 1.

    ``h_actual`` and ``h_virtual`` are ``(n, K)`` stacks of receiver 1's D-slot
    channel row, drawn independently from the same law; ``p_row1`` is receiver
    1's P-slot row, fixing its past output. The precoder and powers stay fixed,
    so the transmit statistics do not depend on either draw. Per-draw values
    differ; the check passes when their means agree within three Monte Carlo
    standard errors.
    """
    h_actual = np.atleast_2d(np.asarray(h_actual, dtype=np.complex128))
    h_virtual = np.atleast_2d(np.asarray(h_virtual, dtype=np.complex128))
    K = precoder.users
    variances = precoder.powers.source_variances().astype(float)
    labels = source_labels(K)
    for name in conditioning.known_streams:
        variances[labels.index(name)] = 0.0
    if conditioning.past_outputs:
        past = np.zeros((1, 2 * K), dtype=np.complex128)
        past[0, :K] = np.asarray(p_row1) @ precoder.p_vectors
    else:
        past = np.zeros((0, 2 * K), dtype=np.complex128)
    actual = np.array([conditional_output_variance(_rx1_d_coefficients(h, precoder.d_vectors), past, variances) for h in h_actual])
    virtual = np.array([conditional_output_variance(_rx1_d_coefficients(h, precoder.d_vectors), past, variances) for h in h_virtual])
    diff = actual - virtual
    n = diff.shape[0]
    deviation = abs(float(diff.mean()))
    se = float(diff.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return SepCheck(
        passed=deviation <= 3.0 * se,
        deviation=deviation,
        std_error=se,
        max_abs_per_draw=float(np.abs(diff).max()),
        actual_mean=float(actual.mean()),
        virtual_mean=float(virtual.mean()),
        draws=n,
    )


# ---------------------------------------------------------------------------
# power accounting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerAudit:
    mean_per_slot: float
    std_error: float
    p_slot_mean: float
    d_slot_mean: float
    budget: float
    blocks: int

    @property
    def exceeds_budget(self):
        """Mean power above the budget by more than three standard errors."""
        return self.mean_per_slot > self.budget + 3.0 * self.std_error

    @property
    def within_3se(self):
        return abs(self.mean_per_slot - self.budget) <= 3.0 * self.std_error


def power_audit(x_p, x_d, budget):
    """Empirical per-slot ``E||X||^2`` over blocks of transmitted vectors ``(n, K)``."""
    e_p = np.sum(np.abs(np.atleast_2d(x_p)) ** 2, axis=-1)
    e_d = np.sum(np.abs(np.atleast_2d(x_d)) ** 2, axis=-1)
    per_block = (e_p + e_d) / 2.0
    n = per_block.shape[0]
    se = float(per_block.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return PowerAudit(
        mean_per_slot=float(per_block.mean()),
        std_error=se,
        p_slot_mean=float(e_p.mean()),
        d_slot_mean=float(e_d.mean()),
        budget=float(budget),
        blocks=n,
    )
