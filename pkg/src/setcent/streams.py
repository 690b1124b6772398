"""Counter-based random streams.

Every random quantity in the package is a pure function of a master seed and
one or more integer counters (sample index, trial index, ...). Results are
therefore independent of how work is split across batches or workers.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_TRIAL_MUL = 0xD6E8FEB86659FD93


def mix64(x: int) -> int:
    """SplitMix64 finalizer on a Python int."""
    x &= _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def derive_seed(seed: int, *counters: int) -> int:
    """Fold counters into ``seed``; distinct counter tuples give unrelated seeds."""
    h = mix64(seed + _GOLDEN)
    for c in counters:
        h = mix64(h ^ mix64((c + 1) * _GOLDEN))
    return h


class SplitMixStream:
    """SplitMix64 generator with exact ``randrange``.

    Far cheaper to create than ``random.Random`` (no Mersenne state), which
    matters because every sampled hyper-edge gets a fresh stream.
    """

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK
        return mix64(self._state)

    def getrandbits(self, k: int) -> int:
        out, have = 0, 0
        while have < k:
            out |= self.next64() << have
            have += 64
        return out & ((1 << k) - 1)

    def randrange(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` by rejection; exact for any ``n``."""
        if n <= 0:
            raise ValueError(f"empty range for randrange({n})")
        k = n.bit_length()
        while True:
            r = self.getrandbits(k)
            if r < n:
                return r

    def random(self) -> float:
        return (self.next64() >> 11) * (1.0 / (1 << 53))


def stream(seed: int, *counters: int) -> SplitMixStream:
    """Independent generator for the given counter tuple."""
    return SplitMixStream(derive_seed(seed, *counters))


def _mix64_array(x: np.ndarray) -> np.ndarray:
    x = x ^ (x >> np.uint64(30))
    x = x * np.uint64(0xBF58476D1CE4E5B9)
    x = x ^ (x >> np.uint64(27))
    x = x * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def rademacher_signs(seed: int, sample_indices, t: int) -> np.ndarray:
    """Signs in {-1, +1} for trials ``0..t-1`` and the given sample indices.

    Returns an int8 array of shape ``(t, len(sample_indices))``. The sign at
    ``(j, s)`` depends only on ``(seed, s, j)``, so a prefix of trials or any
    subset of sample indices is reproduced bit-for-bit.
    """
    s = np.asarray(sample_indices, dtype=np.uint64)
    j = np.arange(t, dtype=np.uint64)
    base = np.uint64(derive_seed(seed, 0x5167))
    with np.errstate(over="ignore"):
        col = _mix64_array(base ^ ((s + np.uint64(1)) * np.uint64(_GOLDEN)))
        row = (j + np.uint64(1)) * np.uint64(_TRIAL_MUL)
        h = _mix64_array(col[None, :] ^ _mix64_array(row)[:, None])
    bits = (h >> np.uint64(63)).astype(np.int8)
    return (2 * bits - 1).astype(np.int8)
