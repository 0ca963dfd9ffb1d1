"""Deterministic counter-based randomness for campaigns.

Every consumer of randomness gets its own Philox substream keyed by
(master seed, consumer id, chunk index).  Philox is counter-based, so a
campaign re-run with the same master seed reproduces every mask, fault
and noise sample bit-exactly, and worker processes can generate their
chunks independently in any order.

Within a chunk, trace-level randomness is drawn as arrays whose leading
axis (or trailing, by convention of the caller) indexes the trace, so
row t of a draw is the substream of trace chunk_start + t.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# consumer ids (the "purpose" key component)
MASKS = 1        # share splitting / remasking inside datapaths
KEYSHARES = 2    # round-key share refresh
FAULT = 3        # random-replace faults and activation coins
NOISE = 4        # gaussian leakage noise
PLAINTEXT = 5    # random plaintext policy
GENERIC = 6


def substream(master_seed: int, consumer: int, chunk: int = 0) -> np.random.Generator:
    """Independent Generator for (master seed, consumer, chunk)."""
    key = np.array(
        [np.uint64(master_seed), (np.uint64(consumer) << np.uint64(32)) | np.uint64(chunk)],
        dtype=np.uint64,
    )
    return np.random.Generator(np.random.Philox(key=key))


@dataclass
class Rng:
    """Seed+counter handle; identical (seed, counter) replays identical bytes."""

    seed: int
    counter: int = 0

    def generator(self, consumer: int = GENERIC) -> np.random.Generator:
        return substream(self.seed, consumer, self.counter)

    def spawn(self, consumer: int, chunk: int = 0) -> "RandFeed":
        return RandFeed(substream(self.seed, consumer, chunk))


class RandFeed:
    """Sequential byte/nibble/bit source used inside the datapaths.

    Draw order is fixed by code order, so a shadow evaluation consumes the
    stream identically whether or not faults fire.
    """

    def __init__(self, gen: np.random.Generator):
        self.gen = gen

    def bytes(self, shape):
        return self.gen.integers(0, 256, size=shape, dtype=np.uint8)

    def nibbles(self, shape):
        return self.gen.integers(0, 16, size=shape, dtype=np.uint8)

    def bits(self, shape):
        return self.gen.integers(0, 2, size=shape, dtype=np.uint8)
