"""
Left-to-right randomness streams.

Every random bit consumed by a simulation enters through one of these. There is
no seek: bits are read once, in order, and the count of consumed bits is exact.
"""

from abc import ABC, abstractmethod
from typing import Iterable, Iterator

import numpy as np

from app.errors import StreamExhaustedError
from app.utils.bits import Bits

_BUFFER_BITS = 4096


class BitStream(ABC):
    """A one-way random tape."""

    def __init__(self):
        self.consumed = 0

    @abstractmethod
    def _next_bit(self) -> int:
        ...

    def read_bit(self) -> int:
        bit = self._next_bit()
        self.consumed += 1
        return bit

    def read_bits(self, count: int) -> Bits:
        return tuple(self.read_bit() for _ in range(count))


class FiniteBitStream(BitStream):
    """A caller-supplied, finite random tape."""

    def __init__(self, bits: Iterable[int]):
        super().__init__()
        self._bits = tuple(bits)

    def _next_bit(self) -> int:
        if self.consumed >= len(self._bits):
            raise StreamExhaustedError(
                f"Randomness stream exhausted after {len(self._bits)} bits"
            )
        return self._bits[self.consumed]

    @property
    def remaining(self) -> int:
        return len(self._bits) - self.consumed


class SeededBitStream(BitStream):
    """An unbounded tape drawn from a numpy generator."""

    def __init__(self, seed_sequence: np.random.SeedSequence):
        super().__init__()
        self._rng = np.random.default_rng(seed_sequence)
        self._buffer: list[int] = []
        self._position = 0

    @classmethod
    def from_seed(cls, master_seed: int) -> "SeededBitStream":
        return cls(np.random.SeedSequence(master_seed))

    def _next_bit(self) -> int:
        if self._position >= len(self._buffer):
            self._buffer = self._rng.integers(0, 2, size=_BUFFER_BITS, dtype=np.uint8).tolist()
            self._position = 0
        bit = self._buffer[self._position]
        self._position += 1
        return bit


def trial_streams(master_seed: int, trials: int) -> Iterator[SeededBitStream]:
    """Independent per-trial streams split from one master seed."""
    for child in np.random.SeedSequence(master_seed).spawn(trials):
        yield SeededBitStream(child)
