"""Deterministic random streams.

Every randomized operation takes an explicit stream value: a (master_seed,
stream_id) pair that yields the same draw sequence on every platform. Batch
code derives per-sample stream ids by stable hashing, so concurrent workers
and re-runs see identical draws regardless of scheduling.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SeededRng:
    """A reproducible stream address: master seed plus per-sample stream id."""

    master_seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(
            [self.master_seed & _MASK64, self.stream_id & _MASK64])
        return np.random.default_rng(seq)


def as_generator(rng) -> np.random.Generator:
    """Accept a SeededRng or an already-instantiated Generator."""
    if isinstance(rng, SeededRng):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected SeededRng or numpy Generator, got {type(rng).__name__}")


def derive_stream_id(*parts) -> int:
    """Stable 64-bit stream id from string/int parts (hash-seed independent)."""
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        h.update(str(part).encode("utf-8"))
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "big")


def uniform_int(gen: np.random.Generator, lo: int, hi: int) -> int:
    """Uniform integer in [lo, hi], consuming exactly one double from the stream."""
    span = hi - lo + 1
    return min(hi, lo + int(gen.random() * span))
