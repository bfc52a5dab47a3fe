"""
Experiment configuration model
"""

from enum import Enum
from pathlib import Path
from typing import Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.models.program import AccessDiscipline
from app.models.simulation import SimulationMode


class ExperimentKind(str, Enum):
    HYBRID_COMPARE = "hybrid-compare"
    MISTAKE_RATE = "mistake-rate"
    EXTRACTOR_VERIFY = "extractor-verify"
    FF_VERIFY = "ff-verify"
    PRG_FOOL = "prg-fool"
    AMPLIFY_CHECK = "amplify-check"

    @property
    def needs_instances(self) -> bool:
        return self not in (ExperimentKind.EXTRACTOR_VERIFY, ExperimentKind.FF_VERIFY)


class GeneratedInstances(BaseModel):
    """Layered random programs; seeds are split from the experiment's master seed."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n: int = Field(..., ge=1)
    m: int = Field(..., ge=1)
    width: int = Field(..., ge=1)
    depth: int = Field(..., ge=0)
    discipline: AccessDiscipline = AccessDiscipline.R_OW
    count: int = Field(1, ge=1)


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: ExperimentKind
    instances: List[Path] = Field(default_factory=list, description="Branching program files")
    generate: Optional[GeneratedInstances] = None
    overrides: Dict[str, Union[int, float]] = Field(
        default_factory=dict, description="SimulationConfig fields; T defaults to length(P)"
    )
    trials: int = Field(1000, ge=1)
    master_seed: Optional[int] = Field(None, ge=0)
    output_dir: Path = Path("results")
    formats: List[Literal["csv", "json"]] = Field(default_factory=lambda: ["csv", "json"])
    check: bool = Field(True, description="Exit 2 when a measured property fails")

    # hybrid-compare
    modes: List[SimulationMode] = Field(
        default_factory=lambda: [SimulationMode.A, SimulationMode.H1], min_length=2, max_length=2
    )
    method: Literal["exact", "sampled"] = "exact"
    x: Optional[str] = Field(None, description="Single input; every x when omitted")
    bad_threshold: float = Field(0.1, ge=0)

    # mistake-rate / amplify-check
    truth: Optional[Path] = Field(None, description="Truth table file; majority vote when omitted")
    max_density: Optional[float] = Field(None, ge=0, le=1)
    delta: float = Field(0.05, gt=0, lt=1)
    r: Optional[int] = Field(None, ge=1)

    # extractor-verify
    ell: int = Field(10, ge=1)
    d: int = Field(4, ge=1)
    s: int = Field(2, ge=1)
    k: int = Field(6, ge=0)
    eps: float = Field(0.25, gt=0, lt=1)
    sources: int = Field(8, ge=1)
    functions: int = Field(10, ge=0)
    codomains: List[int] = Field(default_factory=lambda: [2, 4])

    # ff-verify
    towers: List[int] = Field(default_factory=lambda: [0, 1])
    degrees: List[int] = Field(default_factory=lambda: [0, 1])
    frobenius_cases: int = Field(20, ge=0)

    # prg-fool
    prg: Literal["nisan", "nz"] = "nisan"
    space: Optional[int] = Field(None, ge=1)
    length: Optional[int] = Field(None, ge=1)

    @field_validator("instances", "truth")
    @classmethod
    def check_exists(cls, value):
        paths = value if isinstance(value, list) else [value]
        for path in paths:
            if path is not None and not Path(path).exists():
                raise ValueError(f"Referenced file {path} does not exist")
        return value

    @field_validator("x")
    @classmethod
    def check_bits(cls, value):
        if value is not None and any(ch not in "01" for ch in value):
            raise ValueError(f"x must be a bitstring, got {value!r}")
        return value

    @model_validator(mode="after")
    def check_seed(self):
        sampled = self.method == "sampled" and self.kind == ExperimentKind.HYBRID_COMPARE
        random_inputs = self.kind in (ExperimentKind.EXTRACTOR_VERIFY, ExperimentKind.FF_VERIFY)
        if (sampled or random_inputs or self.generate is not None) and self.master_seed is None:
            raise ValueError(f"master_seed is required for a {self.kind.value} experiment with random draws")
        return self
