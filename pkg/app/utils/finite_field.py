"""
Characteristic-2 field towers used by the GUV condenser.

F16 is F2[w]/(w^4 + w + 1) with generator g = w. Its extensions are
F_q = F16[z]/(z^(5^a) - g^3), q = 16^(5^a), and polynomials over F_q are kept
reduced modulo E(x) = x^(3^b) - g^5. Coefficient vectors are little-endian
(constant term first) everywhere.
"""

from dataclasses import dataclass
from typing import Any, List, Protocol, Sequence, Tuple

from app.config import settings
from app.errors import FieldError, ParameterError, ResourceError
from app.utils.bits import Bits, bits_to_int, int_to_bits

F16_MODULUS = 0b10011
GENERATOR = 0b0010

_EXP = [0] * 30
_LOG = [0] * 16
_value = 1
for _k in range(15):
    _EXP[_k] = _value
    _LOG[_value] = _k
    _value <<= 1
    if _value & 0x10:
        _value ^= F16_MODULUS
for _k in range(15, 30):
    _EXP[_k] = _EXP[_k - 15]


def f16_add(a: int, b: int) -> int:
    return a ^ b


def f16_mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return _EXP[_LOG[a] + _LOG[b]]


def f16_inv(a: int) -> int:
    if a == 0:
        raise FieldError("Inversion of zero in F16")
    return _EXP[(15 - _LOG[a]) % 15]


def f16_pow(a: int, e: int) -> int:
    if e < 0:
        return f16_pow(f16_inv(a), -e)
    if e == 0:
        return 1
    if a == 0:
        return 0
    return _EXP[(_LOG[a] * e) % 15]


def f16_order(a: int) -> int:
    """Multiplicative order of a nonzero element, by brute force."""
    if a == 0:
        raise FieldError("Zero has no multiplicative order")
    value, order = a, 1
    while value != 1:
        value = f16_mul(value, a)
        order += 1
    return order


G3 = f16_pow(GENERATOR, 3)
G5 = f16_pow(GENERATOR, 5)
G10 = f16_pow(GENERATOR, 10)


# ---------------------------------------------------------------------------
# F_q = F16[z]/(z^(5^a) - g^3)
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class FqElement:
    """Residue of F16[z] modulo z^(5^a) - g^3, stored as 5^a F16 coefficients."""

    a: int
    coeffs: Tuple[int, ...]

    def __post_init__(self):
        if len(self.coeffs) != 5 ** self.a:
            raise FieldError(f"Tower a={self.a} needs {5 ** self.a} coefficients, got {len(self.coeffs)}")

    @classmethod
    def zero(cls, a: int) -> "FqElement":
        return cls(a, (0,) * 5 ** a)

    @classmethod
    def scalar(cls, c: int, a: int) -> "FqElement":
        return cls(a, (c,) + (0,) * (5 ** a - 1))

    @classmethod
    def one(cls, a: int) -> "FqElement":
        return cls.scalar(1, a)

    @classmethod
    def z(cls, a: int) -> "FqElement":
        if a == 0:
            return cls.scalar(G3, 0)
        return cls(a, (0, 1) + (0,) * (5 ** a - 2))

    @classmethod
    def from_bits(cls, bits: Sequence[int], a: int) -> "FqElement":
        width = 4 * 5 ** a
        if len(bits) != width:
            raise FieldError(f"Expected {width} bits for tower a={a}, got {len(bits)}")
        return cls(a, tuple(bits_to_int(bits[4 * i:4 * i + 4]) for i in range(5 ** a)))

    def to_bits(self) -> Bits:
        return tuple(bit for c in self.coeffs for bit in int_to_bits(c, 4))

    @property
    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def to_hex(self) -> str:
        return "".join(f"{c:x}" for c in self.coeffs)

    def __add__(self, other: "FqElement") -> "FqElement":
        return fq_add(self, other)

    def __mul__(self, other: "FqElement") -> "FqElement":
        return fq_mul(self, other)

    def __str__(self) -> str:
        return "(" + ",".join(f"{c:x}" for c in self.coeffs) + ")"


def _check_tower(x: FqElement, y: FqElement) -> None:
    if x.a != y.a:
        raise FieldError(f"Tower mismatch: a={x.a} vs a={y.a}")


def fq_add(x: FqElement, y: FqElement) -> FqElement:
    _check_tower(x, y)
    return FqElement(x.a, tuple(f16_add(u, v) for u, v in zip(x.coeffs, y.coeffs)))


def _reduce_tower(product: List[int], size: int) -> Tuple[int, ...]:
    # z^size = g^3, and one pass suffices because 2*size - 2 - size < size
    for k in range(len(product) - 1, size - 1, -1):
        c = product[k]
        if c:
            product[k - size] ^= f16_mul(c, G3)
    return tuple(product[:size])


def fq_mul(x: FqElement, y: FqElement) -> FqElement:
    _check_tower(x, y)
    size = len(x.coeffs)
    product = [0] * (2 * size - 1)
    for i, u in enumerate(x.coeffs):
        if not u:
            continue
        log_u = _LOG[u]
        for j, v in enumerate(y.coeffs):
            if v:
                product[i + j] ^= _EXP[log_u + _LOG[v]]
    return FqElement(x.a, _reduce_tower(product, size))


def fq_square(x: FqElement) -> FqElement:
    size = len(x.coeffs)
    product = [0] * (2 * size - 1)
    for i, u in enumerate(x.coeffs):
        if u:
            product[2 * i] = _EXP[2 * _LOG[u]]
    return FqElement(x.a, _reduce_tower(product, size))


def fq_frobenius(x: FqElement, t: int) -> FqElement:
    """x^(2^t); uses x^q = x to cap the number of squarings."""
    for _ in range(t % (4 * len(x.coeffs))):
        x = fq_square(x)
    return x


def fq_pow(x: FqElement, e: int) -> FqElement:
    if e < 0:
        return fq_pow(fq_inv(x), -e)
    result = FqElement.one(x.a)
    base = x
    while e:
        if e & 1:
            result = fq_mul(result, base)
        base = fq_square(base)
        e >>= 1
    return result


def fq_inv(x: FqElement) -> FqElement:
    """Inverse by extended Euclid on representatives in F16[z]."""
    if x.is_zero:
        raise FieldError("Inversion of zero in F_q")
    modulus = tower_modulus(x.a)
    _, s, _ = poly_xgcd(list(x.coeffs), modulus, F16)
    s = poly_mod(s, modulus, F16)
    return FqElement(x.a, tuple(s + [0] * (len(x.coeffs) - len(s))))


# ---------------------------------------------------------------------------
# Field descriptors and generic polynomial arithmetic
# ---------------------------------------------------------------------------

class FieldOps(Protocol):
    log2_order: int

    def zero(self) -> Any: ...
    def one(self) -> Any: ...
    def add(self, u: Any, v: Any) -> Any: ...
    def mul(self, u: Any, v: Any) -> Any: ...
    def inv(self, u: Any) -> Any: ...
    def is_zero(self, u: Any) -> bool: ...
    def embed(self, c: int) -> Any: ...


class F16Field:
    log2_order = 4

    def zero(self) -> int:
        return 0

    def one(self) -> int:
        return 1

    def add(self, u: int, v: int) -> int:
        return u ^ v

    def mul(self, u: int, v: int) -> int:
        return f16_mul(u, v)

    def inv(self, u: int) -> int:
        return f16_inv(u)

    def is_zero(self, u: int) -> bool:
        return u == 0

    def embed(self, c: int) -> int:
        return c

    def __repr__(self) -> str:
        return "F16"


class FqField:
    def __init__(self, a: int):
        self.a = a
        self.log2_order = 4 * 5 ** a

    def zero(self) -> FqElement:
        return FqElement.zero(self.a)

    def one(self) -> FqElement:
        return FqElement.one(self.a)

    def add(self, u: FqElement, v: FqElement) -> FqElement:
        return fq_add(u, v)

    def mul(self, u: FqElement, v: FqElement) -> FqElement:
        return fq_mul(u, v)

    def inv(self, u: FqElement) -> FqElement:
        return fq_inv(u)

    def is_zero(self, u: FqElement) -> bool:
        return u.is_zero

    def embed(self, c: int) -> FqElement:
        return FqElement.scalar(c, self.a)

    def __repr__(self) -> str:
        return f"F_(16^{5 ** self.a})"


F16 = F16Field()


def poly_trim(p: List[Any], field: FieldOps) -> List[Any]:
    p = list(p)
    while p and field.is_zero(p[-1]):
        p.pop()
    return p


def poly_add(p: List[Any], q: List[Any], field: FieldOps) -> List[Any]:
    if len(p) < len(q):
        p, q = q, p
    out = list(p)
    for k, c in enumerate(q):
        out[k] = field.add(out[k], c)
    return poly_trim(out, field)


def poly_mul(p: List[Any], q: List[Any], field: FieldOps) -> List[Any]:
    p, q = poly_trim(p, field), poly_trim(q, field)
    if not p or not q:
        return []
    out = [field.zero() for _ in range(len(p) + len(q) - 1)]
    for i, u in enumerate(p):
        if field.is_zero(u):
            continue
        for j, v in enumerate(q):
            if not field.is_zero(v):
                out[i + j] = field.add(out[i + j], field.mul(u, v))
    return poly_trim(out, field)


def poly_divmod(p: List[Any], q: List[Any], field: FieldOps) -> Tuple[List[Any], List[Any]]:
    q = poly_trim(q, field)
    if not q:
        raise FieldError("Polynomial division by zero")
    rem = poly_trim(p, field)
    if len(rem) < len(q):
        return [], rem
    lead_inv = field.inv(q[-1])
    quot = [field.zero() for _ in range(len(rem) - len(q) + 1)]
    while len(rem) >= len(q):
        shift = len(rem) - len(q)
        factor = field.mul(rem[-1], lead_inv)
        quot[shift] = factor
        for k, c in enumerate(q):
            # characteristic 2: subtraction is addition
            rem[shift + k] = field.add(rem[shift + k], field.mul(factor, c))
        rem = poly_trim(rem, field)
    return poly_trim(quot, field), rem


def poly_mod(p: List[Any], q: List[Any], field: FieldOps) -> List[Any]:
    return poly_divmod(p, q, field)[1]


def poly_monic(p: List[Any], field: FieldOps) -> List[Any]:
    p = poly_trim(p, field)
    if not p:
        return p
    lead_inv = field.inv(p[-1])
    return [field.mul(c, lead_inv) for c in p]


def poly_gcd(p: List[Any], q: List[Any], field: FieldOps) -> List[Any]:
    p, q = poly_trim(p, field), poly_trim(q, field)
    while q:
        p, q = q, poly_mod(p, q, field)
    return poly_monic(p, field)


def poly_xgcd(p: List[Any], q: List[Any], field: FieldOps) -> Tuple[List[Any], List[Any], List[Any]]:
    """Return (g, s, t) with s*p + t*q = g, g monic."""
    r0, r1 = poly_trim(p, field), poly_trim(q, field)
    s0, s1 = [field.one()], []
    t0, t1 = [], [field.one()]
    while r1:
        quot, rem = poly_divmod(r0, r1, field)
        r0, r1 = r1, rem
        s0, s1 = s1, poly_add(s0, poly_mul(quot, s1, field), field)
        t0, t1 = t1, poly_add(t0, poly_mul(quot, t1, field), field)
    if not r0:
        return [], s0, t0
    lead_inv = field.inv(r0[-1])
    scale = [lead_inv]
    return poly_mul(r0, scale, field), poly_mul(s0, scale, field), poly_mul(t0, scale, field)


def poly_mulmod(p: List[Any], q: List[Any], modulus: List[Any], field: FieldOps) -> List[Any]:
    return poly_mod(poly_mul(p, q, field), modulus, field)


def tower_modulus(a: int) -> List[int]:
    """z^(5^a) - g^3 over F16."""
    return [G3] + [0] * (5 ** a - 1) + [1]


def e_modulus(b: int, field: FieldOps) -> List[Any]:
    """E(x) = x^(3^b) - g^5 over the given field."""
    return [field.embed(G5)] + [field.zero() for _ in range(3 ** b - 1)] + [field.one()]


def check_irreducible(poly: List[Any], field: FieldOps) -> bool:
    """
    Ben-Or irreducibility test: f of degree d is irreducible iff
    gcd(x^(q^i) - x, f) = 1 for every 1 <= i <= d/2.

    Args:
        poly: little-endian coefficients over the field
        field: F16 or an FqField

    Returns:
        True iff the polynomial has no nontrivial factor
    """
    poly = poly_monic(poly, field)
    degree = len(poly) - 1
    if degree < 1:
        raise ParameterError("Irreducibility is defined for degree >= 1")
    if isinstance(field, FqField):
        if field.a > settings.FQ_IRREDUCIBILITY_MAX_TOWER or degree > settings.FQ_IRREDUCIBILITY_MAX_DEGREE:
            raise ResourceError(f"Irreducibility cap exceeded over {field!r} at degree {degree}")
    elif degree > settings.F16_IRREDUCIBILITY_MAX_DEGREE:
        raise ResourceError(f"Irreducibility cap exceeded over F16 at degree {degree}")
    if degree == 1:
        return True
    x = [field.zero(), field.one()]
    power = x
    for _ in range(degree // 2):
        for _ in range(field.log2_order):
            power = poly_mulmod(power, power, poly, field)
        if len(poly_gcd(poly_add(power, x, field), poly, field)) > 1:
            return False
    return True


# ---------------------------------------------------------------------------
# Polynomials over F_q reduced modulo E(x) = x^(3^b) - g^5
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class PolyOverFq:
    a: int
    b: int
    coeffs: Tuple[FqElement, ...]

    def __post_init__(self):
        if len(self.coeffs) != 3 ** self.b:
            raise FieldError(f"Degree bound 3^{self.b} needs {3 ** self.b} coefficients")
        if any(c.a != self.a for c in self.coeffs):
            raise FieldError(f"Coefficient tower differs from a={self.a}")

    @property
    def n(self) -> int:
        return 3 ** self.b

    @classmethod
    def zero(cls, a: int, b: int) -> "PolyOverFq":
        return cls(a, b, tuple(FqElement.zero(a) for _ in range(3 ** b)))

    @classmethod
    def from_coeffs(cls, coeffs: Sequence[FqElement], a: int, b: int) -> "PolyOverFq":
        """Reduce an arbitrary-length coefficient list modulo E."""
        n = 3 ** b
        work = list(coeffs) + [FqElement.zero(a) for _ in range(max(0, n - len(coeffs)))]
        lift = FqElement.scalar(G5, a)
        for k in range(len(work) - 1, n - 1, -1):
            # x^k = g^5 x^(k - n)
            if not work[k].is_zero:
                work[k - n] = fq_add(work[k - n], fq_mul(lift, work[k]))
        return cls(a, b, tuple(work[:n]))

    @classmethod
    def monomial(cls, degree: int, a: int, b: int, coeff: FqElement | None = None) -> "PolyOverFq":
        coeffs = [FqElement.zero(a) for _ in range(degree + 1)]
        coeffs[degree] = coeff if coeff is not None else FqElement.one(a)
        return cls.from_coeffs(coeffs, a, b)

    @classmethod
    def from_bits(cls, bits: Sequence[int], a: int, b: int) -> "PolyOverFq":
        """Little-endian packing, 4*5^a bits per coefficient; short input is zero-padded."""
        width = 4 * 5 ** a
        n = 3 ** b
        if len(bits) > n * width:
            raise FieldError(f"{len(bits)} bits do not fit {n} coefficients of {width} bits")
        padded = list(bits) + [0] * (n * width - len(bits))
        return cls(a, b, tuple(FqElement.from_bits(padded[i * width:(i + 1) * width], a) for i in range(n)))

    @property
    def is_zero(self) -> bool:
        return all(c.is_zero for c in self.coeffs)

    def __add__(self, other: "PolyOverFq") -> "PolyOverFq":
        if (self.a, self.b) != (other.a, other.b):
            raise FieldError("Polynomials over different rings")
        return PolyOverFq(self.a, self.b, tuple(fq_add(u, v) for u, v in zip(self.coeffs, other.coeffs)))

    def __str__(self) -> str:
        terms = [f"{c}x^{k}" for k, c in enumerate(self.coeffs) if not c.is_zero]
        return " + ".join(terms) if terms else "0"


def poly_mul_mod_e(f: PolyOverFq, h: PolyOverFq) -> PolyOverFq:
    """Schoolbook product followed by reduction modulo E."""
    if (f.a, f.b) != (h.a, h.b):
        raise FieldError("Polynomials over different rings")
    field = FqField(f.a)
    return PolyOverFq.from_coeffs(
        poly_mul(list(f.coeffs), list(h.coeffs), field) or [field.zero()], f.a, f.b
    )


def poly_pow_mod_e(f: PolyOverFq, e: int) -> PolyOverFq:
    result = PolyOverFq.monomial(0, f.a, f.b)
    base = f
    while e:
        if e & 1:
            result = poly_mul_mod_e(result, base)
        base = poly_mul_mod_e(base, base)
        e >>= 1
    return result


def naive_frobenius_power(f: PolyOverFq, t: int) -> PolyOverFq:
    """f^(2^t) mod E by t repeated squarings."""
    for _ in range(t):
        f = poly_mul_mod_e(f, f)
    return f


def frobenius_power(f: PolyOverFq, t: int) -> PolyOverFq:
    """
    f^(2^t) mod E without polynomial multiplication.

    In characteristic 2, (sum f_i x^i)^(2^t) = sum f_i^(2^t) x^(i*2^t). Since
    x^(3n) = 1 mod E, the exponent i*2^t reduces mod 3n to e = j + n*c with
    c in {0, 1, 2}, and x^e = g^(5c) x^j.
    """
    if t < 1:
        raise ParameterError(f"Frobenius exponent must be positive, got t={t}")
    n = f.n
    three_n = 3 * n
    shift = pow(2, t, three_n)
    factors = (FqElement.one(f.a), FqElement.scalar(G5, f.a), FqElement.scalar(G10, f.a))
    out = [FqElement.zero(f.a) for _ in range(n)]
    for i, c in enumerate(f.coeffs):
        if c.is_zero:
            continue
        e = (i * shift) % three_n
        j = e % n
        out[j] = fq_add(out[j], fq_mul(factors[e // n], fq_frobenius(c, t)))
    return PolyOverFq(f.a, f.b, tuple(out))


def poly_eval(f: PolyOverFq, y: FqElement) -> FqElement:
    """Horner evaluation."""
    if y.a != f.a:
        raise FieldError(f"Tower mismatch: a={y.a} vs a={f.a}")
    acc = FqElement.zero(f.a)
    for c in reversed(f.coeffs):
        acc = fq_add(fq_mul(acc, y), c)
    return acc
