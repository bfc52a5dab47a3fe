"""
Exact and sampled distributions over program vertices, total variation
distance, and stochastic-matrix calculus.

Two arithmetic modes are supported: "exact" keeps probabilities as Fractions,
"float" uses float64 (numpy arrays for matrices).
"""

import logging
from collections import defaultdict
from fractions import Fraction
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
import sympy

from app.config import settings
from app.errors import DivergenceError, InputError, ResourceError
from app.models.program import AccessDiscipline, RandomizedBranchingProgram
from app.utils.bits import Bits, all_bitstrings
from app.utils.bitstream import BitStream, trial_streams

logger = logging.getLogger(__name__)

Number = Union[Fraction, float]

EXACT = "exact"
FLOAT = "float"


def resolve_arithmetic(arithmetic: Optional[str]) -> str:
    arithmetic = arithmetic or settings.ARITHMETIC
    if arithmetic not in (EXACT, FLOAT):
        raise InputError(f"Unknown arithmetic mode {arithmetic!r}")
    return arithmetic


def _zero(arithmetic: str) -> Number:
    return Fraction(0) if arithmetic == EXACT else 0.0


def _ratio(numerator: int, denominator: int, arithmetic: str) -> Number:
    if arithmetic == EXACT:
        return Fraction(numerator, denominator)
    return numerator / denominator


class VertexDistribution:
    """A probability vector over a fixed index set of vertex ids; absent ids have mass zero."""

    def __init__(self, index: Iterable[int], probabilities: Mapping[int, Number], arithmetic: str = EXACT):
        self.index: Tuple[int, ...] = tuple(sorted(index))
        self.arithmetic = arithmetic
        known = set(self.index)
        self._probs: Dict[int, Number] = {}
        for vertex, p in probabilities.items():
            if vertex not in known:
                raise InputError(f"Vertex {vertex} is outside the distribution's index set")
            if p < 0:
                raise InputError(f"Negative probability {p} at vertex {vertex}")
            if p:
                self._probs[vertex] = p

    @classmethod
    def point_mass(cls, index: Iterable[int], vertex: int, arithmetic: str = EXACT) -> "VertexDistribution":
        one = Fraction(1) if arithmetic == EXACT else 1.0
        return cls(index, {vertex: one}, arithmetic)

    def __getitem__(self, vertex: int) -> Number:
        return self._probs.get(vertex, _zero(self.arithmetic))

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(sorted(self._probs))

    def items(self) -> List[Tuple[int, Number]]:
        return sorted(self._probs.items())

    def total(self) -> Number:
        return sum(self._probs.values(), _zero(self.arithmetic))

    def to_json(self) -> Dict[str, str]:
        return {str(vertex): str(p) for vertex, p in self.items()}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VertexDistribution):
            return NotImplemented
        return self.index == other.index and self._probs == other._probs

    def __repr__(self) -> str:
        body = ", ".join(f"{v}: {p}" for v, p in self.items())
        return f"VertexDistribution({{{body}}})"


def tvd(p: VertexDistribution, q: VertexDistribution) -> Number:
    """Half the l1 distance."""
    if p.index != q.index:
        raise InputError("Distributions are over different index sets")
    support = set(p.support) | set(q.support)
    total = sum((abs(p[v] - q[v]) for v in support), _zero(p.arithmetic))
    return total / 2


def exact_distribution(
    program: RandomizedBranchingProgram,
    v0: int,
    x: Bits,
    arithmetic: Optional[str] = None,
    cap: Optional[int] = None,
) -> VertexDistribution:
    """
    Exact law of the vertex reached from v0 on input x and uniform coins.

    One-way programs (coin index never decreases, steps by at most one) are
    handled by a dynamic program whose state is the vertex plus the value of
    the coin currently being read, if already known. Other programs are
    enumerated over all 2^m coin strings, subject to the enumeration cap.
    """
    arithmetic = resolve_arithmetic(arithmetic)
    cap = cap or settings.ENUMERATION_CAP
    if len(x) != program.n:
        raise InputError(f"Input has {len(x)} bits, program expects {program.n}")
    program.vertex(v0)

    if program.satisfies(AccessDiscipline.R_OW):
        return _one_way_distribution(program, v0, x, arithmetic)
    if 2 ** program.m > cap:
        raise ResourceError(
            f"Enumerating 2^{program.m} coin strings exceeds the cap {cap}; use Monte-Carlo sampling instead"
        )
    counts: Dict[int, int] = defaultdict(int)
    for y in all_bitstrings(program.m):
        v = v0
        while not program.is_terminal(v):
            i, j = program.reads(v)
            v = program.successors(v)[2 * x[i - 1] + y[j - 1]]
        counts[v] += 1
    total = 2 ** program.m
    return VertexDistribution(
        program.ids, {v: _ratio(c, total, arithmetic) for v, c in counts.items()}, arithmetic
    )


def one_way_states(
    program: RandomizedBranchingProgram,
    v0: int,
    x: Bits,
    arithmetic: str,
    blocked: FrozenSet[int] = frozenset(),
    known: Optional[int] = None,
) -> Dict[Tuple[int, Optional[int]], Number]:
    """
    Law of the (vertex, known coin) state where a one-way walk from v0 stops.

    The walk stops at a terminal or at a vertex reading an input index in
    `blocked`. `known` is the value of the coin v0 reads, if already drawn;
    a stopping state keeps a coin value only when its vertex reads that coin.
    """
    one = Fraction(1) if arithmetic == EXACT else 1.0
    half = Fraction(1, 2) if arithmetic == EXACT else 0.5
    mass: Dict[Tuple[int, Optional[int]], Number] = defaultdict(lambda: _zero(arithmetic))
    mass[(v0, None if program.is_terminal(v0) else known)] = one
    result: Dict[Tuple[int, Optional[int]], Number] = defaultdict(lambda: _zero(arithmetic))

    for u in program.topological_order:
        for state in (None, 0, 1):
            p = mass.pop((u, state), None)
            if p is None:
                continue
            if program.is_terminal(u) or program.reads(u)[0] in blocked:
                result[(u, state)] += p
                continue
            i, j = program.reads(u)
            successors = program.successors(u)
            xi = x[i - 1]
            coins = (0, 1) if state is None else (state,)
            share = p * half if state is None else p
            for c in coins:
                w = successors[2 * xi + c]
                next_known = c if not program.is_terminal(w) and program.reads(w)[1] == j else None
                mass[(w, next_known)] += share
    return dict(result)


def _one_way_distribution(program: RandomizedBranchingProgram, v0: int, x: Bits, arithmetic: str) -> VertexDistribution:
    result: Dict[int, Number] = defaultdict(lambda: _zero(arithmetic))
    for (v, _), p in one_way_states(program, v0, x, arithmetic).items():
        result[v] += p
    return VertexDistribution(program.ids, result, arithmetic)


def sampled_distribution(
    sampler: Callable[[BitStream], int],
    trials: int,
    seed: int,
    index: Iterable[int],
    arithmetic: Optional[str] = None,
) -> VertexDistribution:
    """Empirical law of sampler over independent per-trial streams split from seed."""
    arithmetic = resolve_arithmetic(arithmetic)
    if trials < 1:
        raise InputError(f"trials must be >= 1, got {trials}")
    counts: Dict[int, int] = defaultdict(int)
    for stream in trial_streams(seed, trials):
        counts[sampler(stream)] += 1
    return VertexDistribution(index, {v: _ratio(c, trials, arithmetic) for v, c in counts.items()}, arithmetic)


# ---------------------------------------------------------------------------
# Stochastic matrices
# ---------------------------------------------------------------------------

class StochasticMatrix:
    """Square matrix indexed by vertex ids; rows are probability vectors."""

    def __init__(self, index: Sequence[int], rows: Any, arithmetic: str = EXACT):
        self.index: Tuple[int, ...] = tuple(index)
        self.arithmetic = arithmetic
        self._position = {v: k for k, v in enumerate(self.index)}
        size = len(self.index)
        if arithmetic == FLOAT:
            self.rows = np.asarray(rows, dtype=np.float64).reshape(size, size)
        else:
            self.rows = [[Fraction(entry) for entry in row] for row in rows]
            if len(self.rows) != size or any(len(row) != size for row in self.rows):
                raise InputError(f"Matrix rows do not match an index of size {size}")

    @classmethod
    def identity(cls, index: Sequence[int], arithmetic: str = EXACT) -> "StochasticMatrix":
        size = len(index)
        if arithmetic == FLOAT:
            return cls(index, np.eye(size), arithmetic)
        return cls(index, [[Fraction(int(a == b)) for b in range(size)] for a in range(size)], arithmetic)

    @classmethod
    def from_row_distributions(
        cls, index: Sequence[int], rows: Mapping[int, VertexDistribution], arithmetic: str = EXACT
    ) -> "StochasticMatrix":
        table = [[rows[u][v] for v in index] for u in index]
        return cls(index, table, arithmetic)

    def position(self, vertex: int) -> int:
        try:
            return self._position[vertex]
        except KeyError:
            raise InputError(f"Vertex {vertex} is not a row of this matrix") from None

    def entry(self, u: int, v: int) -> Number:
        return self.rows[self.position(u)][self.position(v)]

    def row(self, vertex: int) -> VertexDistribution:
        values = self.rows[self.position(vertex)]
        return VertexDistribution(
            self.index, {v: values[k] for k, v in enumerate(self.index)}, self.arithmetic
        )

    def _check_compatible(self, other: "StochasticMatrix") -> None:
        if self.index != other.index:
            raise InputError("Matrices are indexed by different vertex sets")
        if self.arithmetic != other.arithmetic:
            raise InputError("Matrices use different arithmetic modes")

    def __matmul__(self, other: "StochasticMatrix") -> "StochasticMatrix":
        self._check_compatible(other)
        if self.arithmetic == FLOAT:
            return StochasticMatrix(self.index, self.rows @ other.rows, FLOAT)
        size = len(self.index)
        product = []
        for row in self.rows:
            out = [Fraction(0)] * size
            for k, a in enumerate(row):
                if a:
                    for col, b in enumerate(other.rows[k]):
                        if b:
                            out[col] += a * b
            product.append(out)
        return StochasticMatrix(self.index, product, EXACT)

    def is_stochastic(self, tolerance: float = 1e-9) -> bool:
        if self.arithmetic == FLOAT:
            return bool(np.all(self.rows >= 0) and np.allclose(self.rows.sum(axis=1), 1.0, atol=tolerance))
        return all(all(e >= 0 for e in row) and sum(row) == 1 for row in self.rows)

    def to_json(self) -> List[List[Any]]:
        if self.arithmetic == FLOAT:
            return self.rows.tolist()
        return [[str(e) for e in row] for row in self.rows]


def transition_matrix(
    program: RandomizedBranchingProgram,
    x: Bits,
    step: Callable[[int, Bits, Any], int],
    randomness_space: Sequence[Any],
    arithmetic: Optional[str] = None,
    cap: Optional[int] = None,
    states: Optional[Sequence[int]] = None,
) -> StochasticMatrix:
    """
    M[x]_{uv} = Pr over uniform r in randomness_space that step(u, x, r) = v.

    Rows and columns are the program's vertex ids unless `states` names a
    larger state space.
    """
    arithmetic = resolve_arithmetic(arithmetic)
    cap = cap or settings.ENUMERATION_CAP
    index = tuple(states) if states is not None else program.ids
    work = len(index) * len(randomness_space)
    if work > cap:
        raise ResourceError(f"Building the transition matrix needs {work} evaluations, over the cap {cap}")
    total = len(randomness_space)
    rows: Dict[int, VertexDistribution] = {}
    for u in index:
        counts: Dict[int, int] = defaultdict(int)
        for r in randomness_space:
            counts[step(u, x, r)] += 1
        rows[u] = VertexDistribution(index, {v: _ratio(c, total, arithmetic) for v, c in counts.items()}, arithmetic)
    return StochasticMatrix.from_row_distributions(index, rows, arithmetic)


def matrix_power(matrix: StochasticMatrix, r: int) -> StochasticMatrix:
    """M^r by repeated multiplication."""
    if r < 0:
        raise InputError(f"Matrix power must be nonnegative, got {r}")
    result = StochasticMatrix.identity(matrix.index, matrix.arithmetic)
    for _ in range(r):
        result = result @ matrix
    return result


def row_after(matrix: StochasticMatrix, v0: int, r: int) -> VertexDistribution:
    """Row v0 of M^r, by r vector-matrix products."""
    if matrix.arithmetic == FLOAT:
        vector = np.zeros(len(matrix.index))
        vector[matrix.position(v0)] = 1.0
        for _ in range(r):
            vector = vector @ matrix.rows
        return VertexDistribution(
            matrix.index, {v: float(vector[k]) for k, v in enumerate(matrix.index)}, FLOAT
        )
    vector = [Fraction(0)] * len(matrix.index)
    vector[matrix.position(v0)] = Fraction(1)
    for _ in range(r):
        out = [Fraction(0)] * len(vector)
        for k, a in enumerate(vector):
            if a:
                for col, b in enumerate(matrix.rows[k]):
                    if b:
                        out[col] += a * b
        vector = out
    return VertexDistribution(matrix.index, dict(zip(matrix.index, vector)), EXACT)


def matrix_closeness(first: StochasticMatrix, second: StochasticMatrix) -> Number:
    """Largest row-wise total variation distance."""
    first._check_compatible(second)
    return max(tvd(first.row(v), second.row(v)) for v in first.index)


def absorbing_distribution(
    matrix: StochasticMatrix, v0: int, terminals: Iterable[int]
) -> VertexDistribution:
    """
    Law of the absorbing state reached from v0, treating terminals as absorbing.

    Solves (I - Q) X = R over the transient states reachable from v0, with
    sympy in exact mode and numpy in float mode.
    """
    terminals = frozenset(terminals)
    if v0 in terminals:
        return VertexDistribution.point_mass(matrix.index, v0, matrix.arithmetic)

    graph = nx.DiGraph()
    graph.add_nodes_from(matrix.index)
    for u in matrix.index:
        if u in terminals:
            continue
        row = matrix.rows[matrix.position(u)]
        for k, v in enumerate(matrix.index):
            if row[k] > 0:
                graph.add_edge(u, v)

    reachable = nx.descendants(graph, v0) | {v0}
    transient = sorted(v for v in reachable if v not in terminals)
    absorbing = sorted(v for v in reachable if v in terminals)
    for u in transient:
        if not (nx.descendants(graph, u) & terminals):
            raise DivergenceError(f"Vertex {u} cannot reach a terminal; the chain is not absorbing")

    t_pos = {v: k for k, v in enumerate(transient)}
    source = t_pos[v0]
    logger.debug(f"Absorption solve over {len(transient)} transient and {len(absorbing)} absorbing states")

    if matrix.arithmetic == FLOAT:
        q = np.array([[matrix.entry(u, v) for v in transient] for u in transient], dtype=np.float64)
        r = np.array([[matrix.entry(u, a) for a in absorbing] for u in transient], dtype=np.float64)
        solution = np.linalg.solve(np.eye(len(transient)) - q, r)
        return VertexDistribution(
            matrix.index, {a: float(solution[source, k]) for k, a in enumerate(absorbing)}, FLOAT
        )

    def rational(value: Fraction) -> sympy.Rational:
        return sympy.Rational(value.numerator, value.denominator)

    system = sympy.Matrix(
        len(transient), len(transient),
        lambda a, b: rational(Fraction(int(a == b)) - matrix.entry(transient[a], transient[b])),
    )
    rhs = sympy.Matrix(len(transient), len(absorbing), lambda a, b: rational(matrix.entry(transient[a], absorbing[b])))
    solution = system.LUsolve(rhs)
    probabilities = {}
    for k, a in enumerate(absorbing):
        value = sympy.Rational(solution[source, k])
        probabilities[a] = Fraction(int(value.p), int(value.q))
    return VertexDistribution(matrix.index, probabilities, EXACT)
