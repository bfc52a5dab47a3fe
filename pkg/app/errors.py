"""
Exception hierarchy for the derandomization toolkit.

None of these subclass ValueError, so they pass through pydantic validators
unchanged instead of being folded into a ValidationError.
"""

from typing import Optional


class DerandError(Exception):
    """Base class for every error raised by the toolkit."""


class InputError(DerandError):
    """Dimension mismatch or index out of range."""


class ProgramFormatError(DerandError):
    """Malformed branching program text or structure."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CycleError(ProgramFormatError):
    """The edge relation of a program is not acyclic."""


class DanglingEdgeError(ProgramFormatError):
    """An edge points at a vertex id that does not exist."""


class ConfigurationError(DerandError):
    """Missing labels, bad config syntax or unknown config keys."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ResourceError(DerandError):
    """An enumeration or construction would exceed a configured cap."""


class FieldError(DerandError):
    """Zero inversion or mixing elements of different towers."""


class ParameterError(DerandError):
    """Infeasible parameter choice or violated extraction regime."""


class StreamExhaustedError(DerandError):
    """A finite randomness stream ran out of bits."""


class LengthBoundError(DerandError):
    """A walk ran longer than the declared length bound T."""


class NonAbsorptionError(DerandError):
    """The H3 loop hit its iteration cap before reaching a true terminal."""


class DivergenceError(DerandError):
    """A Markov chain has transient states that never reach a terminal."""
