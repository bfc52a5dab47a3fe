"""
Extractor parameter models
"""

from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class ExtractorKind(str, Enum):
    GUV_COMPOSED = "guv_composed"
    WALK = "walk"
    HASH = "hash"
    CUSTOM = "custom"


class ExtractorSpec(BaseModel):
    """A seeded function {0,1}^ell x {0,1}^d -> {0,1}^s meant to be a (k, eps)-extractor."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    ell: int = Field(..., ge=1, description="Source length in bits")
    d: int = Field(..., ge=1, description="Seed length in bits")
    s: int = Field(..., ge=1, description="Output length in bits")
    k: int = Field(..., ge=0, description="Min-entropy the source is assumed to have")
    eps: float = Field(..., gt=0, lt=1, description="Extraction error")
    kind: ExtractorKind = ExtractorKind.HASH

    @model_validator(mode="after")
    def check_entropy(self):
        if self.k > self.ell:
            raise ValueError(f"k={self.k} exceeds the source length ell={self.ell}")
        return self


class GuvParams(BaseModel):
    """
    Derived parameters of the GUV condenser.

    q = 2^log_q = 16^(5^a) is the field size, n = 3^b the number of source
    coefficients, h = 2^h_log2 the power base and m the number of evaluation
    coordinates after the seed. Fields that only the derivation produces are
    optional so a bare expander shape can be built for tests.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    a: int = Field(..., ge=0)
    b: int = Field(..., ge=0)
    h_log2: int = Field(..., ge=1)
    m: int = Field(..., ge=1)
    ell: Optional[int] = Field(None, ge=1, description="Source length; N = 2^ell")
    k: Optional[int] = Field(None, ge=1)
    eps: Optional[float] = Field(None, gt=0, lt=1)
    alpha: Optional[float] = Field(None, gt=0, lt=0.5)
    alpha_prime: Optional[float] = None
    log_z: Optional[float] = None
    log_h0: Optional[float] = None

    @model_validator(mode="after")
    def check_capacity(self):
        if self.ell is not None and self.n * self.log_q < self.ell:
            raise ValueError(f"q^n = 2^{self.n * self.log_q} is smaller than N = 2^{self.ell}")
        return self

    @property
    def log_q(self) -> int:
        return 4 * 5 ** self.a

    @property
    def q(self) -> int:
        return 2 ** self.log_q

    @property
    def n(self) -> int:
        return 3 ** self.b

    @property
    def h(self) -> int:
        return 2 ** self.h_log2

    @property
    def seed_bits(self) -> int:
        return self.log_q

    @property
    def output_bits(self) -> int:
        return (self.m + 1) * self.log_q
