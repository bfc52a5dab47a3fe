"""
Simulation models - configuration, resolved parameters and phase traces
"""

from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from app.models.extractor_spec import ExtractorSpec
from app.models.prg_params import NisanParams
from app.models.program import HaltReason


class SimulationMode(str, Enum):
    A = "A"
    H1 = "H1"
    H2 = "H2"
    H3 = "H3"
    SOW = "SOW"
    SOW_H1 = "SOW-H1"
    SOW_H2 = "SOW-H2"
    P = "P"

    @property
    def is_sequential(self) -> bool:
        return self in (SimulationMode.SOW, SimulationMode.SOW_H1, SimulationMode.SOW_H2)


class SimulationConfig(BaseModel):
    """Tunables of the input-as-randomness simulation and its hybrids."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    c: int = Field(1, ge=1, description="Mistake-rate exponent constant")
    T: int = Field(..., ge=1, description="Declared length bound; checked when a walk overflows it")
    prg_eps: Optional[float] = Field(None, gt=0, lt=1, description="Nisan error; defaults to the derived eps")
    nisan_block_override: Optional[int] = Field(None, ge=1)
    extractor: Optional[ExtractorSpec] = Field(None, description="Hash extractor over the block when omitted")
    r_override: Optional[int] = Field(None, ge=1)
    block_size_override: Optional[int] = Field(None, ge=1)
    threshold_override: Optional[int] = Field(None, ge=0)
    h_override: Optional[int] = Field(None, ge=1, description="S-OW block size")
    trials: int = Field(1000, ge=1, description="Monte-Carlo sample count")
    master_seed: int = Field(0, ge=0)


class ResolvedParameters(BaseModel):
    """Every derived quantity of one simulation; enough to re-derive a run."""

    model_config = ConfigDict(frozen=True)

    S: int
    n: int
    T: int
    c: int
    block_size: int = Field(..., description="S^(c+1) for R-OW, h for S-OW")
    threshold: int
    direct: bool = Field(..., description="Simulate P directly with T stream bits")
    B: int
    blocks: Tuple[Tuple[int, ...], ...] = Field(..., description="1-indexed input positions per block")
    sources: Tuple[Tuple[int, ...], ...] = Field(
        (), description="Extraction positions per block; the blocks themselves for R-OW, I'_b for S-OW"
    )
    sequential: bool = False
    r: int
    eps: float
    eps_log2: float
    eps_prime: float
    eps_prime_log2: float
    k: float
    nisan: Optional[NisanParams] = None
    extractor: Optional[ExtractorSpec] = None
    block_draw_bits: int = 0

    @property
    def seed_bits(self) -> int:
        return self.nisan.seed_len if self.nisan else 0


class PhaseRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    block: Optional[int] = Field(None, description="Chosen block index, 1-based")
    seed_bits: int = Field(..., description="Stream bits consumed by this phase")
    steps: int
    halt: HaltReason


class PhaseTrace(BaseModel):
    phases: List[PhaseRecord] = Field(default_factory=list)

    def append(self, record: PhaseRecord) -> None:
        self.phases.append(record)

    @property
    def total_steps(self) -> int:
        return sum(p.steps for p in self.phases)

    def summary(self) -> dict:
        halts = {reason.value: 0 for reason in HaltReason}
        for p in self.phases:
            halts[p.halt.value] += 1
        return {"phases": len(self.phases), "steps": self.total_steps, "halts": halts}


class SimulationResult(BaseModel):
    mode: SimulationMode
    vertex: int
    trace: PhaseTrace = Field(default_factory=PhaseTrace)
    bits_consumed: int = 0
