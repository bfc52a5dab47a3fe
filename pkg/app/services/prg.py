"""
Pseudorandom Generator Service
Nisan's recursive hash generator, evaluated bit by bit or materialized, the
concatenated-extraction generator, and exhaustive fooling checks against
randomized branching programs.
"""

import logging
from collections import defaultdict
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from app.config import settings
from app.errors import InputError, ResourceError
from app.models.prg_params import NisanParams, NZParams
from app.models.program import RandomizedBranchingProgram
from app.services.extractors import HashExtractor
from app.utils.bits import Bits, all_bitstrings
from app.utils.distribution import EXACT, VertexDistribution, exact_distribution, tvd

logger = logging.getLogger(__name__)

Generator = Callable[[Bits], Bits]


# ---------------------------------------------------------------------------
# Nisan
# ---------------------------------------------------------------------------

def _check_seed(seed: Bits, expected: int) -> None:
    if len(seed) != expected:
        raise InputError(f"Seed has {len(seed)} bits, generator expects {expected}")


def _level_hash(seed: Bits, params: NisanParams, level: int) -> Tuple[Bits, Bits]:
    """(Toeplitz diagonal, offset) of hash h_level, 1-indexed."""
    w = params.block_bits
    start = w + (level - 1) * params.hash_bits
    return seed[start:start + 2 * w - 1], seed[start + 2 * w - 1:start + params.hash_bits]


def toeplitz_affine(diagonal: Bits, offset: Bits, x: Bits) -> Bits:
    """A x + b over GF(2) with A[r][c] = diagonal[r - c + w - 1]."""
    w = len(x)
    return tuple(
        (sum(diagonal[r - c + w - 1] & x[c] for c in range(w)) + offset[r]) & 1
        for r in range(w)
    )


def nisan_bit(seed: Bits, i: int, params: NisanParams) -> int:
    """
    Bit i of the generator without materializing it: block q = i // w is
    reached by applying h_t for every set bit t - 1 of q, top level first.
    """
    _check_seed(seed, params.seed_len)
    if not 0 <= i < params.length:
        raise InputError(f"Index {i} outside [0, {params.length})")
    w = params.block_bits
    block, offset = divmod(i, w)
    x = seed[:w]
    for level in range(params.levels, 0, -1):
        if block >> (level - 1) & 1:
            x = toeplitz_affine(*_level_hash(seed, params, level), x)
    return x[offset]


def nisan_generate(seed: Bits, params: NisanParams) -> Bits:
    """The full output: G_t(x) = G_{t-1}(x) followed by G_{t-1}(h_t(x)), truncated to T."""
    _check_seed(seed, params.seed_len)

    def expand(x: Bits, level: int) -> List[int]:
        if level == 0:
            return list(x)
        return expand(x, level - 1) + expand(toeplitz_affine(*_level_hash(seed, params, level), x), level - 1)

    return tuple(expand(seed[:params.block_bits], params.levels)[:params.length])


# ---------------------------------------------------------------------------
# Concatenated extraction
# ---------------------------------------------------------------------------

def nz_generate(seed: Bits, params: NZParams) -> Bits:
    """Hash-extract from the source block x0 once per seed block and concatenate."""
    _check_seed(seed, params.seed_len)
    source = seed[:params.source_bits]
    extractor = HashExtractor(
        params.source_bits, params.seed_bits, params.out_bits, params.source_bits, params.eps
    )
    out: List[int] = []
    for t in range(params.calls):
        start = params.source_bits + t * params.seed_bits
        out.extend(extractor(source, seed[start:start + params.seed_bits]))
    return tuple(out[:params.target_len])


# ---------------------------------------------------------------------------
# Fooling checks
# ---------------------------------------------------------------------------

def generated_distribution(
    program: RandomizedBranchingProgram,
    v0: int,
    x: Bits,
    generator: Generator,
    seed_len: int,
    cap: Optional[int] = None,
) -> VertexDistribution:
    """Exact law of eval(P, v0, x, G(seed)) over uniform seeds; coins are the first m output bits."""
    cap = cap or settings.ENUMERATION_CAP
    if 2 ** seed_len > cap:
        raise ResourceError(f"Enumerating 2^{seed_len} seeds exceeds the cap {cap}; use Monte-Carlo sampling instead")
    counts: Dict[int, int] = defaultdict(int)
    for seed in all_bitstrings(seed_len):
        y = generator(seed)
        if len(y) < program.m:
            raise InputError(f"Generator output has {len(y)} bits, program reads {program.m}")
        v = v0
        while not program.is_terminal(v):
            i, j = program.reads(v)
            v = program.successors(v)[2 * x[i - 1] + y[j - 1]]
        counts[v] += 1
    total = 2 ** seed_len
    return VertexDistribution(program.ids, {v: Fraction(c, total) for v, c in counts.items()}, EXACT)


def generator_fooling_tvd(
    program: RandomizedBranchingProgram,
    v0: int,
    x: Bits,
    generator: Generator,
    seed_len: int,
    cap: Optional[int] = None,
) -> Fraction:
    fooled = generated_distribution(program, v0, x, generator, seed_len, cap)
    return tvd(fooled, exact_distribution(program, v0, x, EXACT, cap))


def nisan_fooling_tvd(
    program: RandomizedBranchingProgram, v0: int, x: Bits, params: NisanParams, cap: Optional[int] = None
) -> Fraction:
    distance = generator_fooling_tvd(program, v0, x, lambda z: nisan_generate(z, params), params.seed_len, cap)
    logger.debug(f"Nisan TVD {distance} at S={params.space}, T={params.length}, seed {params.seed_len} bits")
    return distance


def nz_fooling_tvd(
    program: RandomizedBranchingProgram, v0: int, x: Bits, params: NZParams, cap: Optional[int] = None
) -> Fraction:
    distance = generator_fooling_tvd(program, v0, x, lambda z: nz_generate(z, params), params.seed_len, cap)
    logger.debug(f"NZ TVD {distance} at S={params.space}, seed {params.seed_len} bits")
    return distance
