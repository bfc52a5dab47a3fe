"""
Extractor Service
Seeded extractors behind one calling convention, the GUV condenser, and
exhaustive property testers (flat-source verification and the sampler
bad-set count).
"""

import logging
import math
from abc import ABC, abstractmethod
from collections import Counter
from fractions import Fraction
from typing import Callable, Hashable, Iterable, List, NamedTuple, Optional, Protocol, Sequence

import numpy as np

from app.config import settings
from app.errors import InputError, ParameterError, ResourceError
from app.models.extractor_spec import ExtractorKind, ExtractorSpec, GuvParams
from app.utils.bits import Bits, all_bitstrings, bits_to_int, int_to_bits
from app.utils.expander import Expander
from app.utils.finite_field import FqElement, PolyOverFq, frobenius_power, poly_eval
from app.utils.gf2 import GF2m

logger = logging.getLogger(__name__)

REGIME_TOLERANCE = 1e-9


class Extractor(Protocol):
    spec: ExtractorSpec

    def __call__(self, x: Bits, y: Bits) -> Bits: ...


class BaseExtractor(ABC):
    def __init__(self, spec: ExtractorSpec):
        self.spec = spec

    def __call__(self, x: Bits, y: Bits) -> Bits:
        if len(x) != self.spec.ell:
            raise InputError(f"Source has {len(x)} bits, extractor expects {self.spec.ell}")
        if len(y) != self.spec.d:
            raise InputError(f"Seed has {len(y)} bits, extractor expects {self.spec.d}")
        return self.extract(tuple(x), tuple(y))

    @abstractmethod
    def extract(self, x: Bits, y: Bits) -> Bits:
        ...

    def __repr__(self) -> str:
        s = self.spec
        return f"{type(self).__name__}(ell={s.ell}, d={s.d}, s={s.s}, k={s.k}, eps={s.eps})"


# ---------------------------------------------------------------------------
# Hash extractor
# ---------------------------------------------------------------------------

def check_hash_regime(s: int, k: int, eps: float) -> None:
    if s > k - 2 * math.log2(1 / eps) + REGIME_TOLERANCE:
        raise ParameterError(
            f"Output length s={s} exceeds k - 2 log(1/eps) = {k - 2 * math.log2(1 / eps):.3f}"
        )


class HashExtractor(BaseExtractor):
    """
    h_y(x) = low s coefficients of y * x in GF(2^ell), with the d seed bits
    placed in the low coefficients of y. The zero seed is the zero map.
    """

    def __init__(self, ell: int, d: int, s: int, k: int, eps: float):
        if d > ell or s > ell:
            raise ParameterError(f"Hash extractor needs d <= ell and s <= ell (ell={ell}, d={d}, s={s})")
        check_hash_regime(s, k, eps)
        super().__init__(ExtractorSpec(ell=ell, d=d, s=s, k=k, eps=eps, kind=ExtractorKind.HASH))
        self.field = GF2m(ell)

    def extract(self, x: Bits, y: Bits) -> Bits:
        return int_to_bits(self.field.mul(bits_to_int(y), bits_to_int(x)), self.spec.s)


def hash_extract(x: Bits, y: Bits, s: int, k: int, eps: float) -> Bits:
    return HashExtractor(len(x), len(y), s, k, eps)(x, y)


class IdentitySeedExtractor(BaseExtractor):
    """Ext(x, y) = y. Ignores its source, so its output is exactly uniform."""

    def __init__(self, ell: int, d: int):
        super().__init__(ExtractorSpec(ell=ell, d=d, s=d, k=0, eps=0.5, kind=ExtractorKind.CUSTOM))

    def extract(self, x: Bits, y: Bits) -> Bits:
        return y


# ---------------------------------------------------------------------------
# Expander-walk extractor
# ---------------------------------------------------------------------------

class WalkExtractor(BaseExtractor):
    """
    The source is cut into 2^v blocks of `block_bits` bits (surplus bits are
    ignored). The seed names a start block and `walk_length` edge labels of
    the pinned expander; the output is the visited blocks, concatenated and
    truncated to `out_bits`.
    """

    def __init__(self, ell: int, block_bits: int, walk_length: int, out_bits: int,
                 k: Optional[int] = None, eps: float = 0.5):
        if block_bits < 1 or block_bits > ell:
            raise ParameterError(f"Block size {block_bits} does not fit a {ell}-bit source")
        if out_bits > (walk_length + 1) * block_bits:
            raise ParameterError(f"A walk of length {walk_length} visits only {(walk_length + 1) * block_bits} bits")
        self.block_bits = block_bits
        self.walk_length = walk_length
        self.vertex_bits = int(math.floor(math.log2(ell // block_bits)))
        self.expander = Expander(self.vertex_bits)
        d = self.vertex_bits + walk_length * self.expander.label_bits
        if d < 1:
            raise ParameterError("Walk extractor needs at least one seed bit")
        super().__init__(ExtractorSpec(
            ell=ell, d=d, s=out_bits, k=ell if k is None else k, eps=eps, kind=ExtractorKind.WALK,
        ))

    def extract(self, x: Bits, y: Bits) -> Bits:
        v = self.vertex_bits
        start = bits_to_int(y[:v])
        path = self.expander.walk(start, self.expander.labels_from_bits(y[v:]))
        beta = self.block_bits
        out: List[int] = []
        for block in path:
            out.extend(x[block * beta:(block + 1) * beta])
        return tuple(out[:self.spec.s])


def walk_extract(x: Bits, y: Bits, block_bits: int, walk_length: int, out_bits: int) -> Bits:
    return WalkExtractor(len(x), block_bits, walk_length, out_bits)(x, y)


# ---------------------------------------------------------------------------
# GUV condenser
# ---------------------------------------------------------------------------

def derive_guv_params(ell: int, k: int, eps: float, alpha: float = 0.25,
                      max_log_q: Optional[int] = None) -> GuvParams:
    """
    z = 3 log(N) k / eps with N = 2^ell; q = 16^(5^a) for the smallest a with
    log q >= (1 + 1/alpha) log z, which makes alpha' = log z / (log q - log z)
    the largest admissible value <= alpha; n = smallest power of 3 above
    log N / log q; h = smallest power of 2 >= h0 = z^(1/alpha'); m = ceil(k / log h).
    """
    if not 0 < alpha < 0.5:
        raise ParameterError(f"alpha must lie in (0, 1/2), got {alpha}")
    if not 1 <= k <= ell:
        raise ParameterError(f"Need 1 <= k <= ell, got k={k}, ell={ell}")
    max_log_q = max_log_q or settings.GUV_MAX_LOG_Q
    log_z = math.log2(3 * ell * k / eps)
    target = (1 + 1 / alpha) * log_z
    a = 0
    while 4 * 5 ** a < target:
        a += 1
    log_q = 4 * 5 ** a
    if log_q > max_log_q:
        raise ParameterError(f"Required field size 2^{log_q} exceeds the cap 2^{max_log_q}")
    alpha_prime = log_z / (log_q - log_z)
    b = 0
    while 3 ** b <= ell / log_q:
        b += 1
    log_h0 = log_q - log_z
    h_log2 = max(1, math.ceil(log_h0))
    m = math.ceil(k / h_log2)
    params = GuvParams(
        a=a, b=b, h_log2=h_log2, m=m, ell=ell, k=k, eps=eps, alpha=alpha,
        alpha_prime=alpha_prime, log_z=log_z, log_h0=log_h0,
    )
    logger.debug(f"GUV parameters for ell={ell}, k={k}: log q={log_q}, n={params.n}, log h={h_log2}, m={m}")
    return params


def guv_expander(f: PolyOverFq, y: FqElement, params: GuvParams) -> List[FqElement]:
    """(y, f(y), (f^h mod E)(y), ..., (f^(h^(m-1)) mod E)(y))."""
    if (f.a, f.b) != (params.a, params.b) or y.a != params.a:
        raise ParameterError(
            f"Operands over a={f.a}, b={f.b} (seed a={y.a}) do not match parameters a={params.a}, b={params.b}"
        )
    coordinates = [y, poly_eval(f, y)]
    power = f
    for _ in range(1, params.m):
        power = frobenius_power(power, params.h_log2)
        coordinates.append(poly_eval(power, y))
    return coordinates


class GuvCondenser:
    def __init__(self, params: GuvParams):
        self.params = params

    @property
    def seed_bits(self) -> int:
        return self.params.seed_bits

    @property
    def output_bits(self) -> int:
        return self.params.output_bits

    def __call__(self, x: Bits, y: Bits) -> Bits:
        p = self.params
        if len(y) != p.seed_bits:
            raise InputError(f"Condenser seed has {len(y)} bits, expected {p.seed_bits}")
        f = PolyOverFq.from_bits(x, p.a, p.b)
        seed = FqElement.from_bits(y, p.a)
        return tuple(bit for element in guv_expander(f, seed, p) for bit in element.to_bits())


def guv_condense(x: Bits, y: Bits, k: int, eps: float, alpha: float = 0.25) -> Bits:
    return GuvCondenser(derive_guv_params(len(x), k, eps, alpha))(x, y)


class GuvExtractor(BaseExtractor):
    """Condense with GUV, then run the walk extractor on the condensed string."""

    def __init__(self, ell: int, k: int, eps: float, alpha: float = 0.25,
                 walk_length: Optional[int] = None):
        self.condenser = GuvCondenser(derive_guv_params(ell, k, eps, alpha))
        walk_length = settings.GUV_WALK_LENGTH if walk_length is None else walk_length
        out_bits = math.ceil((1 - alpha) * k)
        block_bits = math.ceil(out_bits / (walk_length + 1))
        self.walker = WalkExtractor(self.condenser.output_bits, block_bits, walk_length, out_bits, k=k, eps=eps)
        super().__init__(ExtractorSpec(
            ell=ell, d=self.condenser.seed_bits + self.walker.spec.d, s=out_bits,
            k=k, eps=eps, kind=ExtractorKind.GUV_COMPOSED,
        ))

    def extract(self, x: Bits, y: Bits) -> Bits:
        split = self.condenser.seed_bits
        return self.walker(self.condenser(x, y[:split]), y[split:])


def guv_ext(x: Bits, y: Bits, k: int, eps: float, alpha: float = 0.25) -> Bits:
    return GuvExtractor(len(x), k, eps, alpha)(x, y)


def build_extractor(spec: ExtractorSpec, alpha: float = 0.25) -> BaseExtractor:
    """Instantiate the extractor a spec describes; the derived seed length must match spec.d."""
    if spec.kind == ExtractorKind.HASH:
        return HashExtractor(spec.ell, spec.d, spec.s, spec.k, spec.eps)
    if spec.kind == ExtractorKind.GUV_COMPOSED:
        extractor = GuvExtractor(spec.ell, max(spec.k, 1), spec.eps, alpha)
    elif spec.kind == ExtractorKind.WALK:
        walk_length = settings.GUV_WALK_LENGTH
        extractor = WalkExtractor(spec.ell, math.ceil(spec.s / (walk_length + 1)), walk_length, spec.s, spec.k, spec.eps)
    else:
        raise ParameterError("Custom extractors are passed as objects, not built from a spec")
    if extractor.spec.d != spec.d or extractor.spec.s != spec.s:
        raise ParameterError(
            f"{spec.kind.value} extractor at ell={spec.ell} has d={extractor.spec.d}, s={extractor.spec.s}; "
            f"the spec asks for d={spec.d}, s={spec.s}"
        )
    return extractor


# ---------------------------------------------------------------------------
# Property testers
# ---------------------------------------------------------------------------

class ExtractorVerification(NamedTuple):
    max_tvd: Fraction
    sources: int
    verified: bool


def random_flat_sources(ell: int, k: int, count: int, seed: int) -> List[List[Bits]]:
    """`count` flat sources of min-entropy k: uniformly random 2^k-subsets of {0,1}^ell."""
    rng = np.random.default_rng(seed)
    sources = []
    for _ in range(count):
        support = np.sort(rng.choice(2 ** ell, size=2 ** k, replace=False))
        sources.append([int_to_bits(int(value), ell) for value in support])
    return sources


def random_function(s: int, codomain: int, seed: int) -> Callable[[Bits], int]:
    """A uniformly random f: {0,1}^s -> {0, ..., codomain - 1}."""
    table = np.random.default_rng(seed).integers(0, codomain, size=2 ** s).tolist()
    return lambda z: table[bits_to_int(z)]


def _check_work(work: int, cap: Optional[int]) -> None:
    cap = cap or settings.ENUMERATION_CAP
    if work > cap:
        raise ResourceError(f"Exhaustive test needs {work} evaluations, over the cap {cap}")


def flat_source_tvd(extractor: Extractor, source: Sequence[Bits]) -> Fraction:
    """TVD(Ext(X, U_d), U_s) for X uniform on the source."""
    spec = extractor.spec
    counts = Counter(extractor(x, y) for x in source for y in all_bitstrings(spec.d))
    total = len(source) * 2 ** spec.d
    uniform = Fraction(1, 2 ** spec.s)
    seen = sum(abs(Fraction(c, total) - uniform) for c in counts.values())
    unseen = (2 ** spec.s - len(counts)) * uniform
    return (seen + unseen) / 2


def verify_extractor(extractor: Extractor, sources: Iterable[Sequence[Bits]],
                     cap: Optional[int] = None) -> ExtractorVerification:
    sources = list(sources)
    _check_work(sum(len(src) for src in sources) * 2 ** extractor.spec.d, cap)
    worst = max((flat_source_tvd(extractor, src) for src in sources), default=Fraction(0))
    verdict = ExtractorVerification(worst, len(sources), worst <= Fraction(extractor.spec.eps))
    logger.info(f"Extractor {extractor!r}: max TVD {float(worst):.4f} over {len(sources)} flat sources")
    return verdict


def _law(values: Iterable[Hashable]) -> dict:
    counts = Counter(values)
    total = sum(counts.values())
    return {v: Fraction(c, total) for v, c in counts.items()}


def sampler_badset_count(extractor: Extractor, f: Callable[[Bits], Hashable], delta: float,
                         cap: Optional[int] = None) -> int:
    """#{x : f(U_s) and f(Ext(x, U_d)) are more than delta apart}, by enumeration."""
    spec = extractor.spec
    _check_work(2 ** spec.ell * 2 ** spec.d + 2 ** spec.s, cap)
    reference = _law(f(z) for z in all_bitstrings(spec.s))
    delta = Fraction(delta)
    bad = 0
    for x in all_bitstrings(spec.ell):
        law = _law(f(extractor(x, y)) for y in all_bitstrings(spec.d))
        keys = reference.keys() | law.keys()
        distance = sum(abs(reference.get(v, 0) - law.get(v, 0)) for v in keys) / 2
        if distance > delta:
            bad += 1
    return bad
