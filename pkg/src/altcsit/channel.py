"""Fading draws, receiver noise, the alternating CSIT schedule and the transmitter's CSI view.

Every random draw is derived from ``(seed, stream tag, slot)`` through
``numpy.random.SeedSequence`` so any slot can be regenerated independently.
Row ``k`` of a channel matrix is ``h_k^H``; user 1 is row 0.
"""
import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidUserCount

# stream tags keep channel, noise and symbol draws statistically separate
CHANNEL_STREAM = 0
NOISE_STREAM = 1
SYMBOL_STREAM = 2
VIRTUAL_STREAM = 3


class CsitState(enum.Enum):
    P_ALL = "P_ALL"  # instantaneous CSI of every receiver
    D_FIRST = "D_FIRST"  # receiver 1 only known with a one-slot delay


class Layout(enum.Enum):
    INTERLEAVED = "interleaved"
    CONTIGUOUS = "contiguous"


def rng_for(seed, stream, *counters):
    """Independent generator for ``(seed, stream, *counters)``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(stream), *map(int, counters)]))


def complex_normal(rng, shape, variance=1.0):
    """Circularly symmetric complex Gaussian samples with the given variance."""
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


@dataclass(frozen=True)
class ChannelRealization:
    slot: int
    H: np.ndarray

    @property
    def users(self):
        return self.H.shape[0]


@dataclass(frozen=True)
class NoiseRealization:
    slot: int
    n: np.ndarray


@dataclass(frozen=True)
class CsitSchedule:
    pattern: tuple
    layout: Layout = Layout.INTERLEAVED

    @property
    def block_count(self):
        return len(self.pattern) // 2

    def block_slots(self, block):
        """``(t_P, t_D)`` slot indices of ``block``."""
        if not 0 <= block < self.block_count:
            raise IndexError(f"block {block} out of range")
        if self.layout is Layout.INTERLEAVED:
            return 2 * block, 2 * block + 1
        return block, self.block_count + block


@dataclass(frozen=True)
class TxView:
    """CSI the transmitter may use at ``slot``.

    ``rows`` holds the current-slot channel rows listed in ``row_indices``
    (0-based). ``history`` holds the full matrices of strictly earlier slots.
    """

    slot: int
    state: CsitState
    users: int
    row_indices: tuple
    rows: np.ndarray
    history: tuple = field(default=())

    def row(self, index):
        return self.rows[self.row_indices.index(index)]

    def fingerprint(self):
        """Bytes identifying everything the view exposes."""
        parts = [str((self.slot, self.state.value, self.users, self.row_indices)).encode(), self.rows.tobytes()]
        for past in self.history:
            parts.append(str(past.slot).encode())
            parts.append(past.H.tobytes())
        return b"|".join(parts)


def sample_channel(K, seed, slot):
    """K x K matrix of i.i.d. CN(0, 1) gains for ``slot``, deterministic in ``(K, seed, slot)``."""
    if K < 2:
        raise InvalidUserCount("users must be >= 2")
    rng = rng_for(seed, CHANNEL_STREAM, K, slot)
    H = complex_normal(rng, (K, K))
    H.setflags(write=False)
    return ChannelRealization(slot=int(slot), H=H)


def sample_noise(K, seed, slot):
    rng = rng_for(seed, NOISE_STREAM, K, slot)
    n = complex_normal(rng, K)
    n.setflags(write=False)
    return NoiseRealization(slot=int(slot), n=n)


def make_schedule(block_count, layout=Layout.INTERLEAVED):
    """Alternating schedule with ``2 * block_count`` slots.

    Interleaved: P, D, P, D, ... Contiguous: all P slots first, then all D slots.
    """
    if block_count < 1:
        raise ValueError("block_count must be >= 1")
    layout = Layout(layout)
    if layout is Layout.INTERLEAVED:
        pattern = (CsitState.P_ALL, CsitState.D_FIRST) * block_count
    else:
        pattern = (CsitState.P_ALL,) * block_count + (CsitState.D_FIRST,) * block_count
    return CsitSchedule(pattern=pattern, layout=layout)


def tx_view(realization, state, history=()):
    state = CsitState(state)
    history = tuple(history)
    for past in history:
        if past.slot >= realization.slot:
            raise ValueError(f"history slot {past.slot} is not earlier than {realization.slot}")
    K = realization.users
    if state is CsitState.P_ALL:
        indices = tuple(range(K))
    else:
        indices = tuple(range(1, K))
    rows = np.array(realization.H[list(indices)], copy=True)
    rows.setflags(write=False)
    return TxView(slot=realization.slot, state=state, users=K, row_indices=indices, rows=rows, history=history)
