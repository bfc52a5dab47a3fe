"""
Branching Program Service
Evaluation, restriction, structural metrics, Boolean semantics and test-instance
generation for randomized branching programs.
"""

import logging
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, Iterable, Mapping, NamedTuple, Optional, Union

import networkx as nx
import numpy as np

from app.config import settings
from app.errors import ConfigurationError, InputError, ParameterError, ResourceError
from app.models.program import (
    AccessDiscipline,
    HaltReason,
    RandomizedBranchingProgram,
    RandomProgramSpec,
    Vertex,
)
from app.utils.bits import Bits, all_bitstrings
from app.utils.distribution import EXACT, exact_distribution

logger = logging.getLogger(__name__)

TruthTable = Union[Callable[[Bits], int], Mapping[Bits, int]]


class WalkResult(NamedTuple):
    vertex: int
    steps: int
    halt: HaltReason


def walk(
    program: RandomizedBranchingProgram,
    v: int,
    x: Bits,
    coin: Callable[[int], int],
    blocked: FrozenSet[int] = frozenset(),
    limit: Optional[int] = None,
) -> WalkResult:
    """
    Follow edges labeled x_i(u) y_j(u) from v.

    The walk halts at a true terminal, at a vertex reading an input index in
    `blocked` (a terminal of the restricted program), or after `limit` steps.
    `coin(j)` supplies the 1-indexed random bit y_j.
    """
    steps = 0
    while not program.is_terminal(v):
        i, j = program.reads(v)
        if i in blocked:
            return WalkResult(v, steps, HaltReason.RESTRICTED_READ)
        if limit is not None and steps >= limit:
            return WalkResult(v, steps, HaltReason.EXHAUSTED)
        v = program.successors(v)[2 * x[i - 1] + coin(j)]
        steps += 1
    return WalkResult(v, steps, HaltReason.TRUE_TERMINAL)


def _check_dimensions(program: RandomizedBranchingProgram, x: Bits, y: Optional[Bits] = None) -> None:
    if len(x) != program.n:
        raise InputError(f"Input has {len(x)} bits, program expects n={program.n}")
    if y is not None and len(y) != program.m:
        raise InputError(f"Randomness has {len(y)} bits, program expects m={program.m}")


def evaluate(program: RandomizedBranchingProgram, v: int, x: Bits, y: Bits) -> int:
    """The terminal reached from v on input x and coins y."""
    _check_dimensions(program, x, y)
    program.vertex(v)
    return walk(program, v, x, lambda j: y[j - 1]).vertex


def restrict(program: RandomizedBranchingProgram, indices: Iterable[int]) -> RandomizedBranchingProgram:
    """P|_I: every vertex reading an input index outside I loses its edges."""
    allowed = frozenset(indices)
    outside = [i for i in allowed if not 1 <= i <= program.n]
    if outside:
        raise InputError(f"Restriction indices {sorted(outside)} are outside [1, {program.n}]")
    vertices = tuple(
        v if v.is_terminal or v.i in allowed else Vertex.terminal(v.id)
        for v in program.vertices
    )
    return RandomizedBranchingProgram(
        n=program.n, m=program.m, vertices=vertices,
        start=program.start, accept=program.accept, output_bits=dict(program.output_bits),
    )


def validate_discipline(program: RandomizedBranchingProgram, discipline: AccessDiscipline) -> bool:
    return program.satisfies(AccessDiscipline(discipline))


def length(program: RandomizedBranchingProgram) -> int:
    """Number of edges on the longest path."""
    return nx.dag_longest_path_length(program.graph)


def size(program: RandomizedBranchingProgram) -> int:
    return len(program.vertices)


def queries(program: RandomizedBranchingProgram) -> int:
    """Max over nonterminal paths of 1 + the number of steps that change the input index."""
    changes: Dict[int, int] = {}
    for u in reversed(program.topological_order):
        if program.is_terminal(u):
            continue
        i = program.reads(u)[0]
        best = 0
        for w in set(program.successors(u)):
            if not program.is_terminal(w):
                best = max(best, changes[w] + int(program.reads(w)[0] != i))
        changes[u] = best
    if not changes:
        return 0
    return 1 + max(changes.values())


def output_bit(program: RandomizedBranchingProgram, terminal: int) -> int:
    try:
        return program.output_bits[terminal]
    except KeyError:
        raise ConfigurationError(f"Terminal {terminal} has no output-bit label") from None


def compute_boolean(program: RandomizedBranchingProgram, x: Bits, y: Bits) -> int:
    return output_bit(program, evaluate(program, program.start_vertex, x, y))


def as_truth_function(truth: TruthTable) -> Callable[[Bits], int]:
    if callable(truth):
        return truth
    def lookup(x: Bits) -> int:
        try:
            return truth[tuple(x)]
        except KeyError:
            raise ConfigurationError(f"Truth table has no entry for x={''.join(map(str, x))}") from None
    return lookup


def error_probability(
    program: RandomizedBranchingProgram, x: Bits, expected: int, cap: Optional[int] = None
) -> Fraction:
    """Pr_y[P(x, y) != expected], exactly."""
    law = exact_distribution(program, program.start_vertex, x, EXACT, cap)
    return sum((p for t, p in law.items() if output_bit(program, t) != expected), Fraction(0))


def failure_probability(program: RandomizedBranchingProgram, truth: TruthTable, cap: Optional[int] = None) -> Fraction:
    """max over x of Pr_y[P(x, y) != f(x)], computed exactly."""
    cap = cap or settings.ENUMERATION_CAP
    if 2 ** program.n > cap:
        raise ResourceError(
            f"Enumerating 2^{program.n} inputs exceeds the cap {cap}; estimate by Monte-Carlo instead"
        )
    f = as_truth_function(truth)
    return max(
        (error_probability(program, x, f(x), cap) for x in all_bitstrings(program.n)),
        default=Fraction(0),
    )


def majority_truth_table(program: RandomizedBranchingProgram, cap: Optional[int] = None) -> Dict[Bits, int]:
    """f(x) = 1 iff Pr_y[P(x, y) = 1] >= 1/2."""
    table = {}
    for x in all_bitstrings(program.n):
        table[x] = int(error_probability(program, x, 0, cap) >= Fraction(1, 2))
    return table


def random_program(spec: RandomProgramSpec, seed: int) -> RandomizedBranchingProgram:
    """
    A layered program: one start vertex, depth-1 further layers of `width`
    nonterminals, then two terminals labeled 0 and 1 (the latter is accept).

    Layer t reads coin min(t + 1, m) for the one-way disciplines and a random
    coin otherwise. For the sequential disciplines each vertex in layer t + 1
    inherits its input index from a vertex of layer t, moved by at most one,
    so every vertex has at least one admissible successor.
    """
    if spec.width * spec.depth > settings.RANDOM_PROGRAM_CAP:
        raise ResourceError(f"width*depth = {spec.width * spec.depth} exceeds {settings.RANDOM_PROGRAM_CAP}")
    if spec.depth == 0:
        return RandomizedBranchingProgram(
            n=spec.n, m=spec.m, vertices=(Vertex.terminal(0),), start=0, output_bits={0: 0}
        )

    rng = np.random.default_rng(seed)
    one_way = spec.discipline in (AccessDiscipline.R_OW, AccessDiscipline.S_OW)
    sequential = spec.discipline in (AccessDiscipline.S_OW, AccessDiscipline.S_R)

    layers = [[0]]
    next_id = 1
    for _ in range(1, spec.depth):
        layers.append(list(range(next_id, next_id + spec.width)))
        next_id += spec.width
    reject, accept = next_id, next_id + 1

    positions: Dict[int, int] = {0: int(rng.integers(1, spec.n + 1))}
    for t in range(1, spec.depth):
        previous = layers[t - 1]
        for k, v in enumerate(layers[t]):
            if sequential:
                parent = positions[previous[k % len(previous)]]
                positions[v] = int(np.clip(parent + rng.integers(-1, 2), 1, spec.n))
            else:
                positions[v] = int(rng.integers(1, spec.n + 1))

    vertices = []
    for t, layer in enumerate(layers):
        for v in layer:
            if t + 1 < spec.depth:
                candidates = [
                    w for w in layers[t + 1]
                    if not sequential or abs(positions[w] - positions[v]) <= 1
                ]
            else:
                candidates = [reject, accept]
            edges = tuple(int(candidates[rng.integers(len(candidates))]) for _ in range(4))
            j = min(t + 1, spec.m) if one_way else int(rng.integers(1, spec.m + 1))
            vertices.append(Vertex.nonterminal(v, positions[v], j, edges))
    vertices.extend([Vertex.terminal(reject), Vertex.terminal(accept)])

    program = RandomizedBranchingProgram(
        n=spec.n, m=spec.m, vertices=tuple(vertices), start=0, accept=accept,
        output_bits={reject: 0, accept: 1},
    )
    if not program.satisfies(spec.discipline):
        raise ParameterError(f"Generated program violates {spec.discipline.value}")
    logger.debug(f"Generated {spec.discipline.value} program with {len(vertices)} vertices (seed {seed})")
    return program
