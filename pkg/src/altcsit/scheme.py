"""Block transmission: X(t_P), X(t_D), receiver outputs and the gain table.

A block is one (t_P, t_D) slot pair carrying ``a_1..a_K`` in the P slot and
``b_2..b_K`` plus the artificial noise ``u`` in the D slot, i.e. 2K - 1 data
symbols in total.
"""
import enum
from dataclasses import dataclass

import numpy as np

from .channel import SYMBOL_STREAM, Layout, complex_normal, make_schedule, rng_for, sample_channel
from .errors import DimensionError
from .precoding import allocate_powers, precoders_batch


class SchemeVariant(enum.Enum):
    SECURE_ALTERNATING = "SECURE_ALTERNATING"
    NO_NOISE_BASELINE = "NO_NOISE_BASELINE"

    @property
    def artificial_noise(self):
        return self is SchemeVariant.SECURE_ALTERNATING


def stream_powers(K, P_total, variant=SchemeVariant.SECURE_ALTERNATING, policy="half_noise"):
    """Per-stream powers for ``variant``; the baseline hands the noise budget to the data streams."""
    return allocate_powers(K, P_total, policy, artificial_noise=SchemeVariant(variant).artificial_noise)


def data_symbol_count(K):
    return 2 * K - 1


@dataclass(frozen=True)
class SymbolBlock:
    a: np.ndarray  # a_1..a_K
    b: np.ndarray  # b_2..b_K
    u: complex

    def source_vector(self):
        return np.concatenate([self.a, self.b, [self.u]])


def sample_symbols(powers, seed, block, variant=SchemeVariant.SECURE_ALTERNATING):
    """Independent Gaussian symbols with the stream variances in ``powers``."""
    rng = rng_for(seed, SYMBOL_STREAM, powers.users, block)
    a = complex_normal(rng, powers.users) * np.sqrt(powers.p_slot)
    b = complex_normal(rng, powers.users - 1) * np.sqrt(powers.d_data)
    u = complex_normal(rng, 1)[0] * np.sqrt(powers.d_noise)
    if not SchemeVariant(variant).artificial_noise:
        u = 0j
    return SymbolBlock(a=a, b=b, u=complex(u))


def transmit_block(precoder, symbols, variant=SchemeVariant.SECURE_ALTERNATING):
    """Channel inputs ``(X_p, X_d)`` for one block."""
    K = precoder.users
    if symbols.a.shape != (K,) or symbols.b.shape != (K - 1,):
        raise DimensionError("symbol block does not match the precoder size")
    x_p = precoder.p_vectors @ symbols.a
    u = symbols.u if SchemeVariant(variant).artificial_noise else 0j
    x_d = u * precoder.d_vectors[:, 0] + precoder.d_vectors[:, 1:] @ symbols.b
    return x_p, x_d


@dataclass(frozen=True)
class GainTable:
    """``p[j, k] = <h_j(t_P), v_k(t_P)>`` and likewise ``d`` for the D slot (0-based)."""

    p: np.ndarray
    d: np.ndarray


def effective_gains(precoder, H_p, H_d):
    # rows of H are h_j^H, so H @ V is the table of h_j^H v_k
    return GainTable(p=np.asarray(H_p) @ precoder.p_vectors, d=np.asarray(H_d) @ precoder.d_vectors)


@dataclass(frozen=True)
class BlockObservation:
    y_p: np.ndarray
    y_d: np.ndarray
    signal_p: np.ndarray
    interference_p: np.ndarray
    noise_p: np.ndarray
    signal_d: np.ndarray
    interference_d: np.ndarray
    noise_d: np.ndarray

    def reconstruction_error(self):
        err_p = np.abs(self.signal_p + self.interference_p + self.noise_p - self.y_p)
        err_d = np.abs(self.signal_d + self.interference_d + self.noise_d - self.y_d)
        return float(max(err_p.max(), err_d.max()))


def receive_block(H_p, H_d, x_p, x_d, noise_p, noise_d, precoder=None, symbols=None):
    """Receiver outputs ``y_k(t) = h_k^H(t) X(t) + N_k(t)`` for both slots.

    With ``precoder`` and ``symbols`` the outputs are also split into the wanted
    term and the interference term. Receiver 1 has no wanted stream in the D
    slot, so its whole D-slot signal part lands in ``interference_d``.
    """
    H_p = np.asarray(H_p)
    H_d = np.asarray(H_d)
    K = H_p.shape[0]
    noise_p = np.asarray(getattr(noise_p, "n", noise_p))
    noise_d = np.asarray(getattr(noise_d, "n", noise_d))
    for arr in (H_p, H_d):
        if arr.shape != (K, K):
            raise DimensionError("channel matrices must be K x K")
    for arr in (x_p, x_d, noise_p, noise_d):
        if np.shape(arr) != (K,):
            raise DimensionError("inputs and noise must be length-K vectors")
    y_p = H_p @ x_p + noise_p
    y_d = H_d @ x_d + noise_d
    if precoder is None or symbols is None:
        sig_p = np.zeros(K, dtype=np.complex128)
        sig_d = np.zeros(K, dtype=np.complex128)
        int_p = H_p @ x_p
        int_d = H_d @ x_d
    else:
        gains = effective_gains(precoder, H_p, H_d)
        s_d = np.concatenate([[symbols.u], symbols.b])
        contrib_p = gains.p * symbols.a[None, :]
        contrib_d = gains.d * s_d[None, :]
        sig_p = np.diag(contrib_p).copy()
        int_p = contrib_p.sum(axis=1) - sig_p
        sig_d = np.diag(contrib_d).copy()
        sig_d[0] = 0.0
        int_d = contrib_d.sum(axis=1) - sig_d
    return BlockObservation(y_p, y_d, sig_p, int_p, noise_p, sig_d, int_d, noise_d)


def simulate_inputs(K, P_total, n_blocks, seed, variant=SchemeVariant.SECURE_ALTERNATING, policy="half_noise", layout=Layout.INTERLEAVED):
    """Channel inputs of ``n_blocks`` blocks with fresh channels and symbols.

    Returns ``(x_p, x_d)``, each of shape ``(n_blocks, K)``.
    """
    variant = SchemeVariant(variant)
    powers = stream_powers(K, P_total, variant, policy)
    schedule = make_schedule(n_blocks, layout)
    slots = [schedule.block_slots(i) for i in range(n_blocks)]
    H_p = np.stack([sample_channel(K, seed, tp).H for tp, _ in slots])
    H_d = np.stack([sample_channel(K, seed, td).H for _, td in slots])
    Vp, Vd, _ = precoders_batch(H_p, H_d[:, 1:])
    x_p = np.empty((n_blocks, K), dtype=np.complex128)
    x_d = np.empty((n_blocks, K), dtype=np.complex128)
    for i in range(n_blocks):
        sym = sample_symbols(powers, seed, i, variant)
        x_p[i] = Vp[i] @ sym.a
        x_d[i] = sym.u * Vd[i, :, 0] + Vd[i, :, 1:] @ sym.b
    return x_p, x_d
