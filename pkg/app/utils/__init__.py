"""
Utils package for the derandomization toolkit
"""

from .bits import Bits, all_bitstrings, bits_to_hex, format_bits, hex_to_bits, parse_bits
from .bitstream import BitStream, FiniteBitStream, SeededBitStream
from .bp_format import parse_bp, serialize_bp
from .config_format import dump_config, load_config
from .distribution import StochasticMatrix, VertexDistribution, exact_distribution, tvd

__all__ = [
    "Bits",
    "BitStream",
    "FiniteBitStream",
    "SeededBitStream",
    "StochasticMatrix",
    "VertexDistribution",
    "all_bitstrings",
    "bits_to_hex",
    "dump_config",
    "exact_distribution",
    "format_bits",
    "hex_to_bits",
    "load_config",
    "parse_bits",
    "parse_bp",
    "serialize_bp",
    "tvd",
]
