"""
GIP Derandomization Service
The input-as-seed generator R(x) built from generalized inner products, the
deterministic evaluation of sequential-access programs on R(x), the cost
counter for the three-party simulation, and majority amplification of
one-way programs into sequential-access programs with few coins.
"""

import logging
import math
from fractions import Fraction
from typing import Dict, Hashable, List, NamedTuple, Optional, Tuple

from app.config import settings
from app.errors import InputError, ParameterError, ResourceError
from app.models.amplification import Amplification, ProtocolTranscript
from app.models.gip_layout import GipLayout
from app.models.prg_params import NisanParams
from app.models.program import AccessDiscipline, RandomizedBranchingProgram, Vertex
from app.services.branching_program import (
    TruthTable,
    as_truth_function,
    compute_boolean,
    output_bit,
    queries,
)
from app.services.prg import nisan_bit
from app.utils.bits import Bits, all_bitstrings, int_to_bits, project
from app.utils.bitstream import BitStream
from app.utils.expander import Expander

logger = logging.getLogger(__name__)

BOUND_TEMPLATE = "3*delta + m * 2^(-alpha*n/m)"
# log2 of the factor 4 in size(P') <= 4 * 2^s * r^2 * max(size(P), n * 2^L)
SIZE_SLACK_LOG2 = 2


def gip(x: Bits, y: Bits, z: Bits) -> int:
    """Parity of the coordinate-wise triple products."""
    if not len(x) == len(y) == len(z):
        raise InputError(f"GIP operands differ in length: {len(x)}, {len(y)}, {len(z)}")
    return sum(a & b & c for a, b, c in zip(x, y, z)) & 1


def generate_R(x: Bits, m: int) -> Bits:
    layout = GipLayout.build(len(x), m)
    return tuple(
        gip(*(project(x, layout.block(third, j)) for third in (1, 2, 3)))
        for j in range(1, m + 1)
    )


def derandomize_sr(program: RandomizedBranchingProgram, x: Bits, stream: Optional[BitStream] = None) -> int:
    """P(x, R(x)). Deterministic; `stream` is accepted for interface parity and never read."""
    if len(x) != program.n:
        raise InputError(f"Input has {len(x)} bits, program expects n={program.n}")
    if not program.satisfies(AccessDiscipline.S_R):
        raise InputError("Program does not satisfy the S_R discipline")
    return compute_boolean(program, x, generate_R(x, program.m))


class MistakeRow(NamedTuple):
    x: Bits
    expected: int
    derandomized: int
    mismatch: bool


def mistake_table(program: RandomizedBranchingProgram, truth: TruthTable) -> List[MistakeRow]:
    """One row per x in {0,1}^n, in lexicographic order."""
    if program.n > settings.MAX_EXHAUSTIVE_INPUT_BITS:
        raise ResourceError(
            f"Exhaustive x loop over 2^{program.n} inputs exceeds the cap 2^{settings.MAX_EXHAUSTIVE_INPUT_BITS}"
        )
    f = as_truth_function(truth)
    rows = []
    for x in all_bitstrings(program.n):
        expected, got = f(x), derandomize_sr(program, x)
        rows.append(MistakeRow(x, expected, got, expected != got))
    return rows


def mistake_density(program: RandomizedBranchingProgram, truth: TruthTable) -> Fraction:
    rows = mistake_table(program, truth)
    return Fraction(sum(row.mismatch for row in rows), len(rows))


# ---------------------------------------------------------------------------
# Three-party simulation cost
# ---------------------------------------------------------------------------

def protocol_cost(program: RandomizedBranchingProgram, layout: GipLayout, x: Bits, y: Bits) -> ProtocolTranscript:
    """
    Party 1 sees thirds 2 and 3, party 3 sees thirds 1 and 2. The simulating
    party is fixed at the first read outside the middle third and changes,
    sending the state plus a frame header, whenever a read falls in the third
    it cannot see.
    """
    if len(x) != program.n or len(y) != program.m or layout.n != program.n:
        raise InputError("Input, randomness or layout does not match the program")
    state_bits = max(1, (len(program.vertices) - 1).bit_length())
    current: Optional[int] = None
    parties: List[int] = []
    handoffs = 0
    v = program.start_vertex
    while not program.is_terminal(v):
        i, j = program.reads(v)
        third = layout.third_of(i)
        if third != 2:
            needed = 3 if third == 1 else 1
            if current is None:
                current = needed
                parties.append(needed)
            elif current != needed:
                handoffs += 1
                current = needed
                parties.append(needed)
        v = program.successors(v)[2 * x[i - 1] + y[j - 1]]
    return ProtocolTranscript(
        handoffs=handoffs,
        bits=handoffs * (state_bits + settings.PROTOCOL_FRAME_BITS),
        state_bits=state_bits,
        first_party=parties[0] if parties else None,
        parties=parties,
    )


# ---------------------------------------------------------------------------
# Amplification
# ---------------------------------------------------------------------------

def default_repetitions(delta: float) -> int:
    """Smallest odd integer >= 8 ln(1/delta)."""
    if not 0 < delta < 1:
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")
    r = max(1, math.ceil(8 * math.log(1 / delta)))
    return r if r % 2 else r + 1


def amplified_size(s: int, V: int, r: int, n: int, L: int) -> int:
    """Vertex count of the full product construction."""
    return (
        (2 ** s - 1)
        + 2 ** s * V * r * (r + 1) // 2
        + sum((t + 1) * 2 ** s * n * (2 ** L - 1) for t in range(1, r))
        + sum(t * 2 ** s * (n - 1) for t in range(2, r + 1))
        + 2
    )


def size_bound_log2(program_size: int, n: int, s: int, L: int, r: int) -> float:
    """
    Upper bound on log2 size(P'): log2 max(size(P), n 2^L) + s + 2 ceil(log2 r) + 2.
    The vote counter pairs each run index with a vote count, so r enters squared.
    """
    return math.log2(max(program_size, n * 2 ** L)) + s + 2 * (r - 1).bit_length() + SIZE_SLACK_LOG2


class _Builder:
    """Assigns ids to product-state keys in creation order."""

    def __init__(self):
        self.ids: Dict[Hashable, int] = {}
        self.vertices: List[Vertex] = []

    def id(self, key: Hashable) -> int:
        if key not in self.ids:
            self.ids[key] = len(self.ids)
        return self.ids[key]

    def add(self, key: Hashable, i: int, j: int, edges: Tuple[int, int, int, int]) -> None:
        self.vertices.append(Vertex.nonterminal(self.id(key), i, j, edges))


def amplify_sow_to_sr(
    program: RandomizedBranchingProgram,
    delta: float = 0.05,
    r: Optional[int] = None,
    nisan_eps: float = 0.1,
) -> Amplification:
    """
    Coins: s bits choose the first walk vertex w_1 in {0,1}^s, then r - 1
    labels of L bits each step the walk. Run t evaluates P on
    Nisan(w_t); its coins are functions of the walk vertex, so the run
    reads only input bits and re-reads coin s + (t - 1) L. After run t the
    program reads the next label at the last head position, then walks the
    head back to the position read by P's start vertex. The answer is the
    majority of the r votes.

    The result records queries(P') next to r * (queries(P) + n) and the
    size_bound_log2 bound on log2 size(P').
    """
    if not program.satisfies(AccessDiscipline.S_OW):
        raise InputError("Amplification needs an S_OW program")
    v0 = program.start_vertex
    if program.is_terminal(v0):
        raise ParameterError("Program starts at a terminal; there is nothing to amplify")
    r = r or default_repetitions(delta)
    space = max(1, (len(program.vertices) - 1).bit_length(), (max(program.m, 1) - 1).bit_length())
    nisan = NisanParams.derive(space=space, length=max(program.m, 1), eps=nisan_eps)
    s = nisan.seed_len
    expander = Expander(s)
    L = expander.label_bits
    n = program.n
    nonterminals = [u for u in program.ids if not program.is_terminal(u)]
    expected = amplified_size(s, len(nonterminals), r, n, L)
    if expected > settings.AMPLIFICATION_SIZE_CAP:
        raise ResourceError(f"Amplified program would have {expected} vertices, over the cap {settings.AMPLIFICATION_SIZE_CAP}")

    i0 = program.reads(v0)[0]
    coins = {w: [nisan_bit(int_to_bits(w, s), k, nisan) for k in range(program.m)] for w in range(2 ** s)}
    builder = _Builder()
    reject, accept = builder.id("reject"), builder.id("accept")

    def j_run(t: int) -> int:
        return s + (t - 1) * L

    def same(target: int) -> Tuple[int, int, int, int]:
        return (target,) * 4

    def by_coin(on_zero: int, on_one: int) -> Tuple[int, int, int, int]:
        return (on_zero, on_one, on_zero, on_one)

    def arrive(t: int, w: int, votes: int, p: int) -> int:
        """Head at p, run t about to start from v0."""
        if p == i0:
            return builder.id(("run", t, w, votes, v0))
        return builder.id(("seek", t, w, votes, p))

    def label_reader(t: int, w: int, votes: int, p: int, depth: int = 0, label: int = 0) -> int:
        if depth == L:
            return arrive(t + 1, expander.neighbor(w, label), votes, p)
        return builder.id(("label", t, w, votes, p, depth, label))

    def after_run(t: int, w: int, votes: int, p: int) -> int:
        if t == r:
            return accept if 2 * votes > r else reject
        return label_reader(t, w, votes, p)

    # Seed tree over coins 1..s; node (depth, prefix) has read `depth` coins.
    for depth in range(s):
        for prefix in range(2 ** depth):
            children = []
            for bit in (0, 1):
                value = prefix | bit << depth
                if depth + 1 == s:
                    children.append(builder.id(("run", 1, value, 0, v0)))
                else:
                    children.append(builder.id(("seed", depth + 1, value)))
            builder.add(("seed", depth, prefix), i0, depth + 1, by_coin(*children))

    for t in range(1, r + 1):
        for w in range(2 ** s):
            for votes in range(t):
                for u in nonterminals:
                    i, j = program.reads(u)
                    g = coins[w][j - 1]
                    targets = []
                    for a in (0, 1):
                        nxt = program.successors(u)[2 * a + g]
                        if program.is_terminal(nxt):
                            targets.append(after_run(t, w, votes + output_bit(program, nxt), i))
                        else:
                            targets.append(builder.id(("run", t, w, votes, nxt)))
                    builder.add(("run", t, w, votes, u), i, j_run(t), (targets[0], targets[0], targets[1], targets[1]))

    for t in range(1, r):
        for w in range(2 ** s):
            for votes in range(t + 1):
                for p in range(1, n + 1):
                    for depth in range(L):
                        for label in range(2 ** depth):
                            children = by_coin(*(label_reader(t, w, votes, p, depth + 1, label | bit << depth) for bit in (0, 1)))
                            builder.add(("label", t, w, votes, p, depth, label), p, j_run(t) + depth + 1, children)

    for t in range(2, r + 1):
        for w in range(2 ** s):
            for votes in range(t):
                for p in range(1, n + 1):
                    if p == i0:
                        continue
                    step = p - 1 if p > i0 else p + 1
                    builder.add(("seek", t, w, votes, p), p, j_run(t), same(arrive(t, w, votes, step)))

    vertices = builder.vertices + [Vertex.terminal(reject), Vertex.terminal(accept)]
    amplified = RandomizedBranchingProgram(
        n=n, m=s + (r - 1) * L, vertices=tuple(sorted(vertices, key=lambda v: v.id)),
        start=builder.id(("seed", 0, 0)),
        accept=accept, output_bits={reject: 0, accept: 1},
    )
    logger.info(f"Amplified {len(program.vertices)}-vertex program: r={r}, s={s}, L={L}, {len(vertices)} vertices")
    return Amplification(
        program=amplified, r=r, delta=delta, nisan=nisan, label_bits=L,
        coins=amplified.m, expected_size=expected,
        queries=queries(amplified), queries_bound=r * (queries(program) + n),
        size_bound_log2=size_bound_log2(len(program.vertices), n, s, L, r),
    )
