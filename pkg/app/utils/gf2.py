"""
GF(2)[x] polynomials packed into ints and the binary fields GF(2^l) they define.

Bit k of the int is the coefficient of x^k.
"""

from functools import lru_cache

from app.errors import ParameterError


def gf2_degree(p: int) -> int:
    return p.bit_length() - 1


def gf2_mod(a: int, m: int) -> int:
    dm = gf2_degree(m)
    while a and gf2_degree(a) >= dm:
        a ^= m << (gf2_degree(a) - dm)
    return a


def gf2_mulmod(a: int, b: int, m: int) -> int:
    """Shift-and-add multiplication, reducing as we go."""
    degree = gf2_degree(m)
    top = 1 << degree
    a = gf2_mod(a, m)
    result = 0
    while b:
        if b & 1:
            result ^= a
        a <<= 1
        if a & top:
            a ^= m
        b >>= 1
    return result


def gf2_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, gf2_mod(a, b)
    return a


def gf2_is_irreducible(p: int) -> bool:
    """Ben-Or: gcd(x^(2^i) - x, p) = 1 for all i <= deg(p)/2."""
    degree = gf2_degree(p)
    if degree < 1:
        return False
    if degree == 1:
        return True
    power = 0b10
    for _ in range(degree // 2):
        power = gf2_mulmod(power, power, p)
        if gf2_gcd(power ^ 0b10, p) != 1:
            return False
    return True


@lru_cache(maxsize=None)
def smallest_irreducible(degree: int) -> int:
    """The numerically smallest irreducible polynomial of the given degree."""
    if degree < 1:
        raise ParameterError(f"No irreducible polynomial of degree {degree}")
    for candidate in range(1 << degree, 1 << (degree + 1)):
        if gf2_is_irreducible(candidate):
            return candidate
    raise ParameterError(f"No irreducible polynomial of degree {degree}")


class GF2m:
    """The field GF(2^l) = GF(2)[x]/(p) for the smallest irreducible p of degree l."""

    def __init__(self, degree: int):
        self.degree = degree
        self.modulus = smallest_irreducible(degree)

    def mul(self, a: int, b: int) -> int:
        return gf2_mulmod(a, b, self.modulus)

    def __repr__(self) -> str:
        return f"GF(2^{self.degree}) mod {self.modulus:#x}"
