"""
Configuration settings for the typically-correct derandomization toolkit
"""

import logging
import os
from typing import Any, Dict

from dotenv import load_dotenv

load_dotenv()


class Settings:
    # Application Configuration
    APP_NAME: str = "Typically-Correct Derandomization Toolkit"
    APP_DESCRIPTION: str = "Simulate randomized branching programs with their input as the source of randomness"
    APP_VERSION: str = "1.0.0"
    SCHEMA_VERSION: int = 1

    def __init__(self):
        self._overrides: Dict[str, Any] = {}

    def override(self, **values: Any) -> None:
        """Apply runtime overrides (CLI global flags) on top of the environment."""
        for key, value in values.items():
            if value is not None:
                self._overrides[key] = value

    def reset_overrides(self) -> None:
        self._overrides.clear()

    # Enumeration Configuration
    @property
    def ENUMERATION_CAP(self) -> int:
        if "ENUMERATION_CAP" in self._overrides:
            return int(self._overrides["ENUMERATION_CAP"])
        return int(os.getenv("DERAND_ENUMERATION_CAP", str(2 ** 22)))

    @property
    def ARITHMETIC(self) -> str:
        """Either "exact" (Fractions) or "float" (numpy float64)."""
        if "ARITHMETIC" in self._overrides:
            return str(self._overrides["ARITHMETIC"])
        return os.getenv("DERAND_ARITHMETIC", "exact").lower()

    MAX_EXHAUSTIVE_INPUT_BITS: int = 14
    RANDOM_PROGRAM_CAP: int = 4096

    # Simulation Configuration
    H3_ITERATION_MULTIPLE: int = 64
    PROTOCOL_FRAME_BITS: int = 2
    AMPLIFICATION_SIZE_CAP: int = 2 ** 20

    # Finite Field Configuration
    GUV_MAX_LOG_Q: int = 500
    F16_IRREDUCIBILITY_MAX_DEGREE: int = 27
    FQ_IRREDUCIBILITY_MAX_DEGREE: int = 9
    FQ_IRREDUCIBILITY_MAX_TOWER: int = 1

    # Extractor Configuration
    GUV_WALK_LENGTH: int = 3

    # Logging configuration
    @property
    def LOG_LEVEL(self) -> int:
        name = os.getenv("DERAND_LOG_LEVEL", "INFO").upper()
        return getattr(logging, name, logging.INFO)


# Create settings instance
settings = Settings()
