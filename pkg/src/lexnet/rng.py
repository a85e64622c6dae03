"""Seeded random streams.

Every run owns one :class:`Stream`. The compiled kernel and the pure-Python
path both pull raw 64-bit outputs from the same numpy ``PCG64`` bit generator
and reduce them to bounded integers with the same rejection rule (Lemire's
multiply-shift on the upper 32 bits), so a run is bit-identical whichever
backend executes it.
"""

from __future__ import annotations

import numpy as np

GENERATOR_ID = "numpy.PCG64+lemire32"

_MASK32 = 0xFFFFFFFF
_TWO32 = 1 << 32


class Stream:
    """Bounded-integer draws from a seeded PCG64 bit generator."""

    def __init__(self, seed: int):
        if seed < 0:
            raise ValueError(f"seed must be non-negative, got {seed}")
        self.seed = int(seed)
        self.bitgen = np.random.PCG64(self.seed)

    def below(self, k: int) -> int:
        """Uniform integer in ``[0, k)``. Consumes one or more raw outputs."""
        if not 0 < k <= _TWO32:
            raise ValueError(f"bound must be in [1, 2**32], got {k}")
        threshold = (_TWO32 - k) % k
        raw = self.bitgen.random_raw
        while True:
            m = (int(raw()) >> 32) * k
            if (m & _MASK32) >= threshold:
                return m >> 32

    def below_many(self, k: int, count: int) -> np.ndarray:
        """``count`` successive :meth:`below` draws, vectorised.

        Rejection depends only on the raw value, so filtering the raw stream
        reproduces the sequential draws exactly as long as no raw output is
        pulled beyond the last one the sequential loop would have used.
        """
        if not 0 < k <= _TWO32:
            raise ValueError(f"bound must be in [1, 2**32], got {k}")
        threshold = np.uint64((_TWO32 - k) % k)
        out = np.empty(count, dtype=np.int64)
        filled = 0
        while filled < count:
            raw = self.bitgen.random_raw(count - filled) >> np.uint64(32)
            m = raw * np.uint64(k)
            ok = (m & np.uint64(_MASK32)) >= threshold
            vals = (m[ok] >> np.uint64(32)).astype(np.int64)
            out[filled:filled + vals.size] = vals
            filled += vals.size
        return out

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates shuffle of ``range(n)`` driven by :meth:`below`."""
        perm = np.arange(n, dtype=np.int32)
        for i in range(n - 1, 0, -1):
            j = self.below(i + 1)
            perm[i], perm[j] = perm[j], perm[i]
        return perm


def derive_seed(base_seed: int, *key: int) -> int:
    """Mix a base seed with integer indices into an independent 63-bit seed.

    Uses numpy's ``SeedSequence`` with ``key`` as the spawn key, so distinct
    keys give statistically independent streams.
    """
    seq = np.random.SeedSequence(int(base_seed), spawn_key=tuple(int(k) for k in key))
    return int(seq.generate_state(1, np.uint64)[0] >> np.uint64(1))
