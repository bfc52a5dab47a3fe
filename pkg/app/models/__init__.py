"""
Models package for the derandomization toolkit
"""

from .amplification import Amplification, ProtocolTranscript
from .experiment_config import ExperimentConfig, ExperimentKind, GeneratedInstances
from .extractor_spec import ExtractorKind, ExtractorSpec, GuvParams
from .gip_layout import GipLayout
from .prg_params import NisanParams, NZParams
from .program import AccessDiscipline, HaltReason, RandomizedBranchingProgram, RandomProgramSpec, Vertex
from .simulation import (
    PhaseRecord,
    PhaseTrace,
    ResolvedParameters,
    SimulationConfig,
    SimulationMode,
    SimulationResult,
)

__all__ = [
    "AccessDiscipline",
    "Amplification",
    "ExperimentConfig",
    "ExperimentKind",
    "ExtractorKind",
    "ExtractorSpec",
    "GeneratedInstances",
    "GipLayout",
    "GuvParams",
    "HaltReason",
    "NisanParams",
    "NZParams",
    "PhaseRecord",
    "PhaseTrace",
    "ProtocolTranscript",
    "RandomizedBranchingProgram",
    "RandomProgramSpec",
    "ResolvedParameters",
    "SimulationConfig",
    "SimulationMode",
    "SimulationResult",
    "Vertex",
]
