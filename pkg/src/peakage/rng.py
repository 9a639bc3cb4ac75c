"""Seeded random streams.

Each run gets its own Philox (counter-based) bit generator keyed by
``(seed, stream)`` through :class:`numpy.random.SeedSequence`, so runs in a
sweep never overlap and can execute in any order.
"""
from __future__ import annotations

import hashlib
import math
from itertools import chain
from typing import Iterator

import numpy as np

# smallest nonzero output of Generator.random(); stands in for 0 so that 1 - r < 1
SMALLEST_UNIFORM = 2.0 ** -53

BLOCK = 1 << 16


def make_generator(seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(stream,))))


def stream_key(*parts) -> int:
    """Stable 64-bit stream index from arbitrary printable parts."""
    digest = hashlib.blake2b("|".join(map(str, parts)).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def exponential_from_uniform(u: float, rate: float) -> float:
    """Inverse-CDF exponential variate for ``u`` in (0, 1].

    ``u == 1`` would give exactly 0, so it is nudged to ``1 - 2**-53``.
    """
    if u >= 1.0:
        u = 1.0 - SMALLEST_UNIFORM
    return -math.log(u) / rate


def sample_exponential(rate: float, rng: np.random.Generator) -> float:
    if not rate > 0:
        raise ValueError(f"rate must be positive, got {rate!r}")
    return exponential_from_uniform(1.0 - rng.random(), rate)


def _exp_blocks(rng: np.random.Generator):
    while True:
        r = rng.random(BLOCK)
        r[r == 0.0] = SMALLEST_UNIFORM
        yield (-np.log(1.0 - r)).tolist()


def _uniform_blocks(rng: np.random.Generator):
    while True:
        yield rng.random(BLOCK).tolist()


class VariateStream:
    """Buffered unit-rate exponentials and uniforms for the event loop.

    ``next_exp()`` returns an Exp(1) draw; divide by the rate.  The two kinds
    come from independent child streams so that changing how many uniforms a
    policy consumes does not shift its arrival/service sequence.
    """

    def __init__(self, seed: int, stream: int = 0):
        root = np.random.SeedSequence(seed, spawn_key=(stream,))
        exp_seq, uni_seq = root.spawn(2)
        self.seed = seed
        self.stream = stream
        self._exp: Iterator[float] = chain.from_iterable(
            _exp_blocks(np.random.Generator(np.random.Philox(exp_seq))))
        self._uni: Iterator[float] = chain.from_iterable(
            _uniform_blocks(np.random.Generator(np.random.Philox(uni_seq))))
        self.next_exp = self._exp.__next__
        self.next_uniform = self._uni.__next__
