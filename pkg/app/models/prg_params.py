"""
Pseudorandom generator parameter models
"""

import math
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class NisanParams(BaseModel):
    """
    Recursive hash generator stretching a seed to `length` bits.

    The seed is the base block (block_bits) followed by one affine hash per
    level: a Toeplitz matrix (2w - 1 bits) and an offset (w bits).
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    space: int = Field(..., ge=1, description="Space bound S of the programs to fool")
    length: int = Field(..., ge=1, description="Output length T")
    eps: float = Field(..., gt=0, lt=1)
    block_bits: int = Field(..., ge=1)
    levels: int = Field(..., ge=0)

    @model_validator(mode="after")
    def check_shape(self):
        if self.length > 2 ** self.space:
            raise ValueError(f"Output length {self.length} exceeds 2^S = {2 ** self.space}")
        if self.block_bits * 2 ** self.levels < self.length:
            raise ValueError("block_bits * 2^levels must cover the output length")
        return self

    @classmethod
    def derive(cls, space: int, length: int, eps: float, block_override: Optional[int] = None) -> "NisanParams":
        block = block_override or min(space + math.ceil(math.log2(1 / eps)), length)
        levels = 0
        while block * 2 ** levels < length:
            levels += 1
        return cls(space=space, length=length, eps=eps, block_bits=block, levels=levels)

    @property
    def hash_bits(self) -> int:
        return 3 * self.block_bits - 1

    @property
    def s1(self) -> int:
        """Bits describing the hash functions."""
        return self.levels * self.hash_bits

    @property
    def s2(self) -> int:
        """Bits of the base block."""
        return self.block_bits

    @property
    def seed_len(self) -> int:
        return self.s1 + self.s2


class NZParams(BaseModel):
    """Concatenated hash extractions from one source block: seed = source + calls * seed_bits."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    space: int = Field(..., ge=1)
    target_len: int = Field(..., ge=1)
    source_bits: int = Field(..., ge=1)
    seed_bits: int = Field(..., ge=1)
    out_bits: int = Field(..., ge=1)
    eps: float = Field(..., gt=0, lt=1)

    @model_validator(mode="after")
    def check_shape(self):
        if self.seed_bits > self.source_bits:
            raise ValueError("Extractor seed cannot be longer than the source block")
        return self

    @classmethod
    def derive(cls, space: int, target_len: int, eps: float) -> "NZParams":
        source = 2 * space
        out = max(1, source - 2 * math.ceil(math.log2(1 / eps)))
        return cls(space=space, target_len=target_len, source_bits=source, seed_bits=source, out_bits=out, eps=eps)

    @property
    def calls(self) -> int:
        return -(-self.target_len // self.out_bits)

    @property
    def seed_len(self) -> int:
        return self.source_bits + self.calls * self.seed_bits
