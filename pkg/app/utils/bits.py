"""
Bitstring helpers.

Bitstrings are tuples of 0/1 ints. Integer packing is little-endian: bit k of
the tuple is the coefficient of 2^k.
"""

from itertools import product
from typing import Iterable, Iterator, Tuple

from app.errors import InputError

Bits = Tuple[int, ...]


def parse_bits(text: str) -> Bits:
    """Parse a string such as "0110" into a bit tuple."""
    text = text.strip()
    if any(ch not in "01" for ch in text):
        raise InputError(f"Not a bitstring: {text!r}")
    return tuple(int(ch) for ch in text)


def format_bits(bits: Iterable[int]) -> str:
    return "".join(str(b) for b in bits)


def bits_to_int(bits: Iterable[int]) -> int:
    value = 0
    for k, bit in enumerate(bits):
        value |= (bit & 1) << k
    return value


def int_to_bits(value: int, width: int) -> Bits:
    return tuple((value >> k) & 1 for k in range(width))


def all_bitstrings(width: int) -> Iterator[Bits]:
    """Every bitstring of the given width, in lexicographic order."""
    return product((0, 1), repeat=width)


def bits_to_hex(bits: Iterable[int]) -> str:
    """Pack bits MSB-first into hex nibbles, zero-padding the last nibble."""
    bits = list(bits)
    if not bits:
        return ""
    while len(bits) % 4:
        bits.append(0)
    digits = []
    for start in range(0, len(bits), 4):
        nibble = bits[start] << 3 | bits[start + 1] << 2 | bits[start + 2] << 1 | bits[start + 3]
        digits.append(f"{nibble:x}")
    return "".join(digits)


def hex_to_bits(text: str, width: int | None = None) -> Bits:
    """Inverse of bits_to_hex; truncated or zero-extended to width when given."""
    text = text.strip().lower().removeprefix("0x")
    try:
        bits = [int(bit) for ch in text for bit in f"{int(ch, 16):04b}"]
    except ValueError as exc:
        raise InputError(f"Not a hex string: {text!r}") from exc
    if width is not None:
        bits = (bits + [0] * width)[:width]
    return tuple(bits)


def project(x: Bits, positions: Iterable[int]) -> Bits:
    """x restricted to 1-indexed positions, in the given order."""
    return tuple(x[p - 1] for p in positions)

