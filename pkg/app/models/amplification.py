"""
Models for the generator-based protocols: transcripts and amplified programs
"""

from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field

from app.models.prg_params import NisanParams
from app.models.program import RandomizedBranchingProgram


class ProtocolTranscript(BaseModel):
    """Cost of the three-party simulation of one evaluation."""

    handoffs: int = Field(..., ge=0)
    bits: int = Field(..., ge=0, description="handoffs * (state bits + frame header)")
    state_bits: int
    first_party: Optional[int] = Field(None, description="1 or 3; None if only the middle third was read")
    parties: List[int] = Field(default_factory=list, description="Simulating party after each handoff")


class Amplification(BaseModel):
    """An S-R program taking a majority over r Nisan-seeded runs along an expander walk."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    program: RandomizedBranchingProgram
    r: int = Field(..., ge=1)
    delta: Optional[float] = None
    nisan: NisanParams
    label_bits: int = Field(..., ge=0)
    coins: int = Field(..., description="s + (r - 1) * label_bits")
    expected_size: int
    queries: int = Field(..., description="queries(P') of the built program")
    queries_bound: int = Field(..., description="r * (queries(P) + n)")
    size_bound_log2: float = Field(..., description="Bound on log2 size(P'); see size_bound_log2")

    @property
    def seed_bits(self) -> int:
        return self.nisan.seed_len
