"""
Simulator Service
Runs a randomized branching program with most of its randomness extracted
from its own input: the random-access algorithm, its three hybrids, the
sequential-access variant with its two hybrids, and exact phase-matrix laws
for every mode.

Coins inside a phase are indexed relative to the coin read by the phase's
start vertex, so a T-bit tape covers any walk of at most T steps. A phase
that stops on a vertex reading the coin it last drew hands that coin to the
next phase, so no coin of P is ever drawn twice.
"""

import logging
import math
from collections import defaultdict
from typing import Callable, Dict, List, NamedTuple, Optional, Tuple

from app.config import settings
from app.errors import InputError, LengthBoundError, NonAbsorptionError, ParameterError
from app.models.extractor_spec import ExtractorKind, ExtractorSpec
from app.models.prg_params import NisanParams
from app.models.program import AccessDiscipline, HaltReason, RandomizedBranchingProgram
from app.models.simulation import (
    PhaseRecord,
    PhaseTrace,
    ResolvedParameters,
    SimulationConfig,
    SimulationMode,
    SimulationResult,
)
from app.services.branching_program import walk
from app.services.extractors import BaseExtractor, build_extractor
from app.services.prg import nisan_bit
from app.utils.bits import Bits, all_bitstrings, project
from app.utils.bitstream import BitStream
from app.utils.distribution import (
    StochasticMatrix,
    VertexDistribution,
    absorbing_distribution,
    exact_distribution,
    one_way_states,
    resolve_arithmetic,
    row_after,
    sampled_distribution,
    transition_matrix,
)

logger = logging.getLogger(__name__)

LOG2_E = math.log2(math.e)
# ceil(log2(1/eps)) is all the Nisan block length uses; this keeps eps representable
MIN_PRG_EPS = 2.0 ** -1000


class Setup(NamedTuple):
    params: ResolvedParameters
    extractor: Optional[BaseExtractor]


def _ceil_log2(value: int) -> int:
    return (max(value, 1) - 1).bit_length()


def space_bound(program: RandomizedBranchingProgram) -> int:
    """S = max(ceil log2 size(P), ceil log2 n, 1)."""
    return max(_ceil_log2(len(program.vertices)), _ceil_log2(program.n), 1)


# ---------------------------------------------------------------------------
# Parameters
# ---------------------------------------------------------------------------

def _error_terms(S: int, c: int, eps_denominator: int) -> Dict[str, float]:
    """eps = e^(-cS) / eps_denominator and eps' = 2 eps / 2^S, kept in log2 form as well."""
    eps_log2 = -c * S * LOG2_E - math.log2(eps_denominator)
    eps_prime_log2 = eps_log2 + 1 - S
    return {
        "eps": 2.0 ** eps_log2, "eps_log2": eps_log2,
        "eps_prime": 2.0 ** eps_prime_log2, "eps_prime_log2": eps_prime_log2,
    }


def _nisan(S: int, cfg: SimulationConfig, eps: float) -> NisanParams:
    return NisanParams.derive(
        space=max(S, _ceil_log2(cfg.T)),
        length=cfg.T,
        eps=cfg.prg_eps or max(eps, MIN_PRG_EPS),
        block_override=cfg.nisan_block_override,
    )


def _extractor_spec(cfg: SimulationConfig, source_bits: int, seed_len: int, k: float) -> ExtractorSpec:
    """
    The attached extractor, or a hash extractor over the source. The hash
    spec assumes min-entropy k capped at the source length and floored at
    s + 2, so its stated error 2^(-(k - s)/2) stays at most 1/2.
    """
    if cfg.extractor is not None:
        spec = cfg.extractor
        if spec.ell != source_bits or spec.s != seed_len:
            raise ParameterError(
                f"Attached extractor maps {spec.ell} -> {spec.s} bits; the simulation needs "
                f"{source_bits} -> {seed_len}"
            )
        return spec
    if seed_len >= source_bits:
        raise ParameterError(
            f"Nisan seed of {seed_len} bits cannot be hash-extracted from a {source_bits}-bit block; "
            f"raise the block size or attach an extractor"
        )
    entropy = min(source_bits, max(math.ceil(k), seed_len + 2))
    return ExtractorSpec(
        ell=source_bits, d=source_bits, s=seed_len, k=entropy,
        eps=2.0 ** (-(entropy - seed_len) / 2), kind=ExtractorKind.HASH,
    )


def _k(seed_len: int, block_size: int, eps_log2: float) -> float:
    return max(float(seed_len ** 3), math.log2(max(block_size, 1)) ** 6, (-eps_log2) ** 6)


def derive_parameters(program: RandomizedBranchingProgram, cfg: SimulationConfig) -> ResolvedParameters:
    """Blocks, phase count and error terms of the random-access simulation."""
    S = space_bound(program)
    n, c = program.n, cfg.c
    block = cfg.block_size_override or S ** (c + 1)
    threshold = cfg.threshold_override if cfg.threshold_override is not None else n // 9
    B = n // block
    direct = block > threshold or B == 0
    blocks = tuple(tuple(range((b - 1) * block + 1, b * block + 1)) for b in range(1, B + 1))
    if cfg.r_override:
        r = cfg.r_override
    else:
        if B <= 8:
            logger.warning(f"Only {B} blocks; the phase-count formula falls back to a denominator of 1")
        r = max(math.ceil(8 * cfg.T / max(B - 8, 1)), 8 * (c * S + 1))
    errors = _error_terms(S, c, 4 * r)

    nisan = extractor = None
    seed_len = 0
    if direct:
        logger.warning(f"Block size {block} exceeds threshold {threshold}; simulating P directly")
    else:
        nisan = _nisan(S, cfg, errors["eps"])
        seed_len = nisan.seed_len
    k = _k(seed_len, block, errors["eps_log2"])
    if not direct:
        extractor = _extractor_spec(cfg, block, seed_len, k)

    params = ResolvedParameters(
        S=S, n=n, T=cfg.T, c=c, block_size=block, threshold=threshold, direct=direct, B=B,
        blocks=blocks, sources=blocks, r=r, k=k,
        nisan=nisan, extractor=extractor, block_draw_bits=_ceil_log2(B), **errors,
    )
    logger.info(f"Resolved R-OW simulation: S={S}, block={block}, B={B}, r={r}, direct={direct}")
    return params


def derive_sow_parameters(program: RandomizedBranchingProgram, cfg: SimulationConfig) -> ResolvedParameters:
    """
    B = ceil(n / h) blocks of size h; the last one is short when h does not
    divide n. The extraction set I'_b drops the blocks b - 1, b, b + 1 and
    then its largest positions, down to the common size n - 3h.
    """
    S = space_bound(program)
    n, c = program.n, cfg.c
    base = cfg.block_size_override or S ** (c + 1)
    threshold = cfg.threshold_override if cfg.threshold_override is not None else math.isqrt(n)
    h = cfg.h_override or n // (3 * base)
    B = -(-n // h) if h else 0
    source_bits = n - 3 * h
    direct = base > threshold or h < 1 or source_bits < 1

    blocks: Tuple[Tuple[int, ...], ...] = ()
    sources: Tuple[Tuple[int, ...], ...] = ()
    if not direct:
        blocks = tuple(tuple(range((b - 1) * h + 1, min(b * h, n) + 1)) for b in range(1, B + 1))
        built = []
        for b in range(1, B + 1):
            near = {i for k in (b - 1, b, b + 1) if 1 <= k <= B for i in blocks[k - 1]}
            built.append(tuple(i for i in range(1, n + 1) if i not in near)[:source_bits])
        sources = tuple(built)
    r = cfg.r_override or math.ceil(cfg.T / max(h, 1))
    errors = _error_terms(S, c, 2 * r)
    k = math.sqrt(n)

    nisan = extractor = None
    if direct:
        logger.warning(f"S^(c+1) = {base} exceeds threshold {threshold} or h = {h} is degenerate; simulating P directly")
    else:
        nisan = _nisan(S, cfg, errors["eps"])
        extractor = _extractor_spec(cfg, source_bits, nisan.seed_len, k)

    params = ResolvedParameters(
        S=S, n=n, T=cfg.T, c=c, block_size=h, threshold=threshold, direct=direct, B=B,
        blocks=blocks, sources=sources, sequential=True, r=r, k=k,
        nisan=nisan, extractor=extractor, **errors,
    )
    logger.info(f"Resolved S-OW simulation: S={S}, h={h}, B={B}, r={r}, direct={direct}")
    return params


def prepare(program: RandomizedBranchingProgram, cfg: SimulationConfig, sequential: bool = False,
            extractor: Optional[BaseExtractor] = None) -> Setup:
    """Validate the discipline and resolve parameters; `extractor` replaces the one cfg describes."""
    if extractor is not None:
        cfg = cfg.model_copy(update={"extractor": extractor.spec})
    discipline = AccessDiscipline.S_OW if sequential else AccessDiscipline.R_OW
    if not program.satisfies(discipline):
        raise InputError(f"Program does not satisfy the {discipline.value} discipline")
    params = derive_sow_parameters(program, cfg) if sequential else derive_parameters(program, cfg)
    if params.direct:
        extractor = None
    elif extractor is None:
        extractor = build_extractor(params.extractor)
    return Setup(params, extractor)


def _check_input(program: RandomizedBranchingProgram, v0: int, x: Bits) -> None:
    if len(x) != program.n:
        raise InputError(f"Input has {len(x)} bits, program expects n={program.n}")
    program.vertex(v0)


# ---------------------------------------------------------------------------
# Phases
# ---------------------------------------------------------------------------

class PhaseResult(NamedTuple):
    """Where a phase stopped; `known` is the value of the coin that vertex reads, if already drawn."""

    vertex: int
    steps: int
    halt: HaltReason
    known: Optional[int] = None


def phase_walk(
    program: RandomizedBranchingProgram,
    u: int,
    x: Bits,
    blocked: frozenset,
    coin_at: Callable[[int], int],
    limit: int,
    known: Optional[int] = None,
) -> PhaseResult:
    """
    Walk P restricted away from `blocked`; coin_at(k) is the k-th coin of this phase, 0-based.

    `known` is the coin u reads when an earlier phase already drew it; the
    phase then reuses it instead of drawing coin 0.
    """
    if program.is_terminal(u):
        return PhaseResult(u, 0, HaltReason.TRUE_TERMINAL)
    j0 = program.reads(u)[1]
    drawn: Dict[int, int] = {}

    def coin(j: int) -> int:
        if j not in drawn:
            drawn[j] = known if j == j0 and known is not None else coin_at(j - j0)
        return drawn[j]

    result = walk(program, u, x, coin, blocked, limit)
    if result.halt == HaltReason.EXHAUSTED:
        raise LengthBoundError(f"Walk from vertex {u} ran past T = {limit} steps; T < length(P)")
    if result.halt == HaltReason.TRUE_TERMINAL:
        return PhaseResult(result.vertex, result.steps, result.halt)
    if result.steps == 0:
        return PhaseResult(u, 0, result.halt, known)
    return PhaseResult(result.vertex, result.steps, result.halt, drawn.get(program.reads(result.vertex)[1]))


def _extracted_coins(setup: Setup, x: Bits, b: int, y: Bits) -> Callable[[int], int]:
    seed = setup.extractor(project(x, setup.params.sources[b - 1]), y)
    return lambda k: nisan_bit(seed, k, setup.params.nisan)


def _seeded_coins(setup: Setup, seed: Bits) -> Callable[[int], int]:
    return lambda k: nisan_bit(seed, k, setup.params.nisan)


def _tape_coins(tape: Bits) -> Callable[[int], int]:
    return lambda k: tape[k]


def _phase_randomness(setup: Setup, mode: SimulationMode) -> int:
    """Stream bits one phase reads after the block draw."""
    if mode in (SimulationMode.A, SimulationMode.SOW):
        return setup.extractor.spec.d
    if mode in (SimulationMode.H1, SimulationMode.SOW_H1):
        return setup.params.seed_bits
    return setup.params.T


def _coins_for(setup: Setup, mode: SimulationMode, x: Bits, b: int, randomness: Bits) -> Callable[[int], int]:
    if mode in (SimulationMode.A, SimulationMode.SOW):
        return _extracted_coins(setup, x, b, randomness)
    if mode in (SimulationMode.H1, SimulationMode.SOW_H1):
        return _seeded_coins(setup, randomness)
    return _tape_coins(randomness)


def phase_step(
    program: RandomizedBranchingProgram, setup: Setup, mode: SimulationMode,
    u: int, x: Bits, b: int, randomness: Bits, known: Optional[int] = None,
) -> PhaseResult:
    """One phase from u with block b and the phase's randomness (extractor seed, Nisan seed or tape)."""
    coins = _coins_for(setup, mode, x, b, randomness)
    blocked = frozenset(setup.params.sources[b - 1] if mode.is_sequential else setup.params.blocks[b - 1])
    return phase_walk(program, u, x, blocked, coins, setup.params.T, known)


def block_of(params: ResolvedParameters, i: int) -> int:
    """The S-OW block holding input position i."""
    return min((i - 1) // params.block_size + 1, params.B)


def draw_block(stream: BitStream, B: int) -> int:
    """Uniform b in [B] by rejection sampling over ceil(log2 B)-bit reads."""
    width = _ceil_log2(B)
    while True:
        value = 0
        for k, bit in enumerate(stream.read_bits(width)):
            value |= bit << k
        if value < B:
            return value + 1


def _direct(program: RandomizedBranchingProgram, v0: int, x: Bits, T: int, stream: BitStream,
            mode: SimulationMode) -> SimulationResult:
    start = stream.consumed
    tape = stream.read_bits(T)
    result = phase_walk(program, v0, x, frozenset(), _tape_coins(tape), T)
    trace = PhaseTrace()
    trace.append(PhaseRecord(block=None, seed_bits=T, steps=result.steps, halt=result.halt))
    return SimulationResult(mode=mode, vertex=result.vertex, trace=trace, bits_consumed=stream.consumed - start)


def _run_random_access(program: RandomizedBranchingProgram, v0: int, x: Bits, setup: Setup,
                       stream: BitStream, mode: SimulationMode) -> SimulationResult:
    params = setup.params
    if program.is_terminal(v0):
        return SimulationResult(mode=mode, vertex=v0)
    if params.direct:
        return _direct(program, v0, x, params.T, stream, mode)

    start = stream.consumed
    phase_mode = SimulationMode.H2 if mode == SimulationMode.H3 else mode
    phase_bits = _phase_randomness(setup, phase_mode)
    phases = params.r
    if mode == SimulationMode.H3:
        phases = settings.H3_ITERATION_MULTIPLE * params.r
    trace = PhaseTrace()
    v, known = v0, None
    for t in range(phases):
        if mode == SimulationMode.H3 and program.is_terminal(v):
            break
        before = stream.consumed
        b = draw_block(stream, params.B)
        randomness = stream.read_bits(phase_bits)
        result = phase_step(program, setup, phase_mode, v, x, b, randomness, known)
        trace.append(PhaseRecord(block=b, seed_bits=stream.consumed - before, steps=result.steps, halt=result.halt))
        logger.debug(f"{mode.value} phase {t + 1}: block {b}, {result.steps} steps, {result.halt.value}")
        v, known = result.vertex, result.known
    else:
        if mode == SimulationMode.H3 and not program.is_terminal(v):
            raise NonAbsorptionError(f"No true terminal after {phases} phases (cap {settings.H3_ITERATION_MULTIPLE} * r)")
    return SimulationResult(mode=mode, vertex=v, trace=trace, bits_consumed=stream.consumed - start)


def _run_sequential(program: RandomizedBranchingProgram, v0: int, x: Bits, setup: Setup,
                    stream: BitStream, mode: SimulationMode) -> SimulationResult:
    params = setup.params
    if program.is_terminal(v0):
        return SimulationResult(mode=mode, vertex=v0)
    if params.direct:
        return _direct(program, v0, x, params.T, stream, mode)

    start = stream.consumed
    phase_bits = _phase_randomness(setup, mode)
    trace = PhaseTrace()
    v, known = v0, None
    for t in range(params.r):
        if program.is_terminal(v):
            break
        b = block_of(params, program.reads(v)[0])
        before = stream.consumed
        result = phase_step(program, setup, mode, v, x, b, stream.read_bits(phase_bits), known)
        trace.append(PhaseRecord(block=b, seed_bits=stream.consumed - before, steps=result.steps, halt=result.halt))
        logger.debug(f"{mode.value} phase {t + 1}: block {b}, {result.steps} steps, {result.halt.value}")
        v, known = result.vertex, result.known
    return SimulationResult(mode=mode, vertex=v, trace=trace, bits_consumed=stream.consumed - start)


def run_prepared(program: RandomizedBranchingProgram, v0: int, x: Bits, setup: Setup,
                 mode: SimulationMode, stream: BitStream) -> SimulationResult:
    """Run a non-P mode against parameters resolved once by `prepare`."""
    runner = _run_sequential if mode.is_sequential else _run_random_access
    return runner(program, v0, x, setup, stream, mode)


def _run(program: RandomizedBranchingProgram, v0: int, x: Bits, cfg: SimulationConfig,
         stream: BitStream, mode: SimulationMode) -> SimulationResult:
    _check_input(program, v0, x)
    return run_prepared(program, v0, x, prepare(program, cfg, mode.is_sequential), mode, stream)


def simulate_A(
    program: RandomizedBranchingProgram, v0: int, x: Bits, cfg: SimulationConfig, stream: BitStream
) -> SimulationResult:
    """Per phase: draw b, extract a Nisan seed from x restricted to I_b, walk P restricted away from I_b."""
    return _run(program, v0, x, cfg, stream, SimulationMode.A)


def hybrid_h1(
    program: RandomizedBranchingProgram, v0: int, x: Bits, cfg: SimulationConfig, stream: BitStream
) -> SimulationResult:
    """As simulate_A with a uniform Nisan seed from the stream."""
    return _run(program, v0, x, cfg, stream, SimulationMode.H1)


def hybrid_h2(
    program: RandomizedBranchingProgram, v0: int, x: Bits, cfg: SimulationConfig, stream: BitStream
) -> SimulationResult:
    """As simulate_A with T uniform coins per phase."""
    return _run(program, v0, x, cfg, stream, SimulationMode.H2)


def hybrid_h3(
    program: RandomizedBranchingProgram, v0: int, x: Bits, cfg: SimulationConfig, stream: BitStream
) -> SimulationResult:
    """H2 phases until a true terminal of P, capped at H3_ITERATION_MULTIPLE * r phases."""
    return _run(program, v0, x, cfg, stream, SimulationMode.H3)


def simulate_sow(
    program: RandomizedBranchingProgram, v0: int, x: Bits, cfg: SimulationConfig, stream: BitStream
) -> SimulationResult:
    """Sequential-access variant: the block follows the head, extraction uses I'_b."""
    return _run(program, v0, x, cfg, stream, SimulationMode.SOW)


def hybrid_sow_h1(
    program: RandomizedBranchingProgram, v0: int, x: Bits, cfg: SimulationConfig, stream: BitStream
) -> SimulationResult:
    return _run(program, v0, x, cfg, stream, SimulationMode.SOW_H1)


def hybrid_sow_h2(
    program: RandomizedBranchingProgram, v0: int, x: Bits, cfg: SimulationConfig, stream: BitStream
) -> SimulationResult:
    return _run(program, v0, x, cfg, stream, SimulationMode.SOW_H2)


def simulate(program: RandomizedBranchingProgram, v0: int, x: Bits, cfg: SimulationConfig,
             mode: SimulationMode, stream: BitStream) -> SimulationResult:
    """Run one mode; mode P is the direct simulation with T stream bits."""
    mode = SimulationMode(mode)
    if mode == SimulationMode.P:
        _check_input(program, v0, x)
        if program.is_terminal(v0):
            return SimulationResult(mode=mode, vertex=v0)
        return _direct(program, v0, x, cfg.T, stream, mode)
    return _run(program, v0, x, cfg, stream, mode)


# ---------------------------------------------------------------------------
# Exact and sampled laws
# ---------------------------------------------------------------------------

def phase_state(v: int, known: Optional[int] = None) -> int:
    """Matrix index of the phase state (v, known coin): 3v, 3v + 1 or 3v + 2."""
    return 3 * v + (0 if known is None else known + 1)


def _unpack_state(state: int) -> Tuple[int, Optional[int]]:
    v, code = divmod(state, 3)
    return v, (None if code == 0 else code - 1)


def phase_states(program: RandomizedBranchingProgram) -> List[int]:
    """Terminals carry no coin; every other vertex may start a phase with its coin unknown, 0 or 1."""
    return sorted(
        phase_state(v, known)
        for v in program.ids
        for known in ((None,) if program.is_terminal(v) else (None, 0, 1))
    )


def _restricted_row(program: RandomizedBranchingProgram, state: int, x: Bits,
                    cut_sets: List[Tuple[int, ...]], states: List[int], arithmetic: str) -> VertexDistribution:
    u, known = _unpack_state(state)
    total: Dict[int, object] = defaultdict(int)
    for cut in cut_sets:
        law = one_way_states(program, u, x, arithmetic, frozenset(cut), known)
        for (v, carried), p in law.items():
            target = phase_state(v, carried)
            total[target] = total[target] + p / len(cut_sets)
    return VertexDistribution(states, total, arithmetic)


def phase_matrix(program: RandomizedBranchingProgram, x: Bits, setup: Setup, mode: SimulationMode,
                 arithmetic: Optional[str] = None, cap: Optional[int] = None) -> StochasticMatrix:
    """
    The one-phase transition matrix of a mode over `phase_states`, exact by
    enumeration of the phase randomness. A phase that stops at a vertex
    reading the coin it just drew hands that coin to the next phase.
    """
    arithmetic = resolve_arithmetic(arithmetic)
    mode = SimulationMode(mode)
    params = setup.params
    if params.direct:
        raise ParameterError("The direct branch has no phase structure")
    states = phase_states(program)

    if mode in (SimulationMode.H2, SimulationMode.H3, SimulationMode.SOW_H2):
        rows = {}
        for state in states:
            u = _unpack_state(state)[0]
            if program.is_terminal(u):
                rows[state] = VertexDistribution.point_mass(states, state, arithmetic)
            elif mode.is_sequential:
                b = block_of(params, program.reads(u)[0])
                rows[state] = _restricted_row(program, state, x, [params.sources[b - 1]], states, arithmetic)
            else:
                rows[state] = _restricted_row(program, state, x, list(params.blocks), states, arithmetic)
        return StochasticMatrix.from_row_distributions(states, rows, arithmetic)

    seeds = list(all_bitstrings(_phase_randomness(setup, mode)))
    if mode.is_sequential:
        def step(state: int, x: Bits, y: Bits) -> int:
            u, known = _unpack_state(state)
            if program.is_terminal(u):
                return state
            result = phase_step(program, setup, mode, u, x, block_of(params, program.reads(u)[0]), y, known)
            return phase_state(result.vertex, result.known)
        return transition_matrix(program, x, step, seeds, arithmetic, cap, states)

    def step(state: int, x: Bits, draw: Tuple[int, Bits]) -> int:
        u, known = _unpack_state(state)
        result = phase_step(program, setup, mode, u, x, draw[0], draw[1], known)
        return phase_state(result.vertex, result.known)
    space = [(b, y) for b in range(1, params.B + 1) for y in seeds]
    return transition_matrix(program, x, step, space, arithmetic, cap, states)


def _vertex_law(program: RandomizedBranchingProgram, law: VertexDistribution) -> VertexDistribution:
    total: Dict[int, object] = defaultdict(int)
    for state, p in law.items():
        v = _unpack_state(state)[0]
        total[v] = total[v] + p
    return VertexDistribution(program.ids, total, law.arithmetic)


def exact_law(program: RandomizedBranchingProgram, v0: int, x: Bits, cfg: SimulationConfig,
              mode: SimulationMode, arithmetic: Optional[str] = None, cap: Optional[int] = None,
              extractor: Optional[BaseExtractor] = None) -> VertexDistribution:
    """Row v0 of the r-th power of the phase matrix; H3 is its absorbing law, P the exact law of P."""
    mode = SimulationMode(mode)
    _check_input(program, v0, x)
    if mode == SimulationMode.P:
        return exact_distribution(program, v0, x, arithmetic, cap)
    setup = prepare(program, cfg, mode.is_sequential, extractor)
    if setup.params.direct:
        return exact_distribution(program, v0, x, arithmetic, cap)
    matrix = phase_matrix(program, x, setup, mode, arithmetic, cap)
    if mode == SimulationMode.H3:
        terminals = [phase_state(t) for t in program.terminal_ids]
        return _vertex_law(program, absorbing_distribution(matrix, phase_state(v0), terminals))
    return _vertex_law(program, row_after(matrix, phase_state(v0), setup.params.r))


def sample_law(program: RandomizedBranchingProgram, v0: int, x: Bits, cfg: SimulationConfig,
               mode: SimulationMode, trials: Optional[int] = None, master_seed: Optional[int] = None,
               arithmetic: Optional[str] = None, extractor: Optional[BaseExtractor] = None) -> VertexDistribution:
    """Monte-Carlo law over independent per-trial streams split from the master seed."""
    mode = SimulationMode(mode)
    _check_input(program, v0, x)
    trials = trials or cfg.trials
    master_seed = cfg.master_seed if master_seed is None else master_seed
    if mode == SimulationMode.P:
        def sampler(stream: BitStream) -> int:
            return simulate(program, v0, x, cfg, mode, stream).vertex
    else:
        setup = prepare(program, cfg, mode.is_sequential, extractor)

        def sampler(stream: BitStream) -> int:
            return run_prepared(program, v0, x, setup, mode, stream).vertex
    logger.info(f"Sampling {mode.value} over {trials} trials (master seed {master_seed})")
    return sampled_distribution(sampler, trials, master_seed, program.ids, arithmetic)
