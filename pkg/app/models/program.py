"""
Randomized branching program model
"""

from enum import Enum
from typing import Dict, FrozenSet, Optional, Tuple

import networkx as nx
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator

from app.errors import CycleError, DanglingEdgeError, InputError, ProgramFormatError

EDGE_LABELS: Tuple[str, ...] = ("00", "01", "10", "11")


class AccessDiscipline(str, Enum):
    R_OW = "R_OW"
    S_OW = "S_OW"
    S_R = "S_R"
    UNRESTRICTED = "UNRESTRICTED"


class VertexKind(str, Enum):
    TERMINAL = "terminal"
    NONTERMINAL = "nonterminal"


class HaltReason(str, Enum):
    """Why a walk stopped."""

    TRUE_TERMINAL = "true-terminal"
    RESTRICTED_READ = "restricted-read"
    EXHAUSTED = "exhausted"


class Vertex(BaseModel):
    """One vertex. Edge targets are ordered by label (input bit, random bit): 00, 01, 10, 11."""

    model_config = ConfigDict(frozen=True)

    id: int = Field(..., ge=0)
    kind: VertexKind
    i: Optional[int] = Field(None, description="1-indexed input bit read here")
    j: Optional[int] = Field(None, description="1-indexed random bit read here")
    edges: Optional[Tuple[int, int, int, int]] = None

    @model_validator(mode="after")
    def check_shape(self):
        if self.kind == VertexKind.NONTERMINAL:
            if self.i is None or self.j is None or self.edges is None:
                raise ValueError(f"Nonterminal vertex {self.id} needs i, j and four edges")
        elif self.i is not None or self.j is not None or self.edges is not None:
            raise ValueError(f"Terminal vertex {self.id} cannot read bits or have edges")
        return self

    @classmethod
    def terminal(cls, vertex_id: int) -> "Vertex":
        return cls(id=vertex_id, kind=VertexKind.TERMINAL)

    @classmethod
    def nonterminal(cls, vertex_id: int, i: int, j: int, edges: Tuple[int, int, int, int]) -> "Vertex":
        return cls(id=vertex_id, kind=VertexKind.NONTERMINAL, i=i, j=j, edges=tuple(edges))

    @property
    def is_terminal(self) -> bool:
        return self.kind == VertexKind.TERMINAL

    def target(self, input_bit: int, random_bit: int) -> int:
        return self.edges[2 * input_bit + random_bit]


class RandomizedBranchingProgram(BaseModel):
    """
    A DAG whose nonterminals read one input bit x_i and one random bit y_j and
    branch four ways on the pair. Immutable once built; the adjacency is
    compiled into plain dicts for the evaluation loops.
    """

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=0, description="Input length in bits")
    m: int = Field(..., ge=0, description="Randomness length in bits")
    vertices: Tuple[Vertex, ...]
    start: Optional[int] = None
    accept: Optional[int] = None
    output_bits: Dict[int, int] = Field(default_factory=dict)

    _by_id: Dict[int, Vertex] = PrivateAttr(default_factory=dict)
    _succ: Dict[int, Tuple[int, int, int, int]] = PrivateAttr(default_factory=dict)
    _reads: Dict[int, Tuple[int, int]] = PrivateAttr(default_factory=dict)
    _graph: Optional[nx.DiGraph] = PrivateAttr(default=None)
    _order: Tuple[int, ...] = PrivateAttr(default=())
    _cache: Dict[str, int] = PrivateAttr(default_factory=dict)

    def model_post_init(self, __context) -> None:
        by_id: Dict[int, Vertex] = {}
        for vertex in self.vertices:
            if vertex.id in by_id:
                raise ProgramFormatError(f"Duplicate vertex id {vertex.id}")
            by_id[vertex.id] = vertex

        graph = nx.DiGraph()
        graph.add_nodes_from(by_id)
        for vertex in self.vertices:
            if vertex.is_terminal:
                continue
            if not 1 <= vertex.i <= self.n:
                raise ProgramFormatError(f"Vertex {vertex.id} reads x_{vertex.i} outside [1, {self.n}]")
            if not 1 <= vertex.j <= self.m:
                raise ProgramFormatError(f"Vertex {vertex.id} reads y_{vertex.j} outside [1, {self.m}]")
            for label, target in zip(EDGE_LABELS, vertex.edges):
                if target not in by_id:
                    raise DanglingEdgeError(f"Edge {label} of vertex {vertex.id} points to unknown id {target}")
                graph.add_edge(vertex.id, target)
            self._succ[vertex.id] = vertex.edges
            self._reads[vertex.id] = (vertex.i, vertex.j)

        for name in ("start", "accept"):
            value = getattr(self, name)
            if value is not None and value not in by_id:
                raise DanglingEdgeError(f"{name} vertex {value} does not exist")
        for vertex_id, bit in self.output_bits.items():
            if vertex_id not in by_id or not by_id[vertex_id].is_terminal:
                raise ProgramFormatError(f"Output bit assigned to non-terminal or unknown vertex {vertex_id}")
            if bit not in (0, 1):
                raise ProgramFormatError(f"Output bit of vertex {vertex_id} must be 0 or 1, got {bit}")

        if not nx.is_directed_acyclic_graph(graph):
            cycle = nx.find_cycle(graph)
            raise CycleError(f"Edge relation has a cycle through vertices {[u for u, _ in cycle]}")

        self._by_id = by_id
        self._graph = graph
        self._order = tuple(nx.lexicographical_topological_sort(graph))

    # Lookups

    def vertex(self, vertex_id: int) -> Vertex:
        try:
            return self._by_id[vertex_id]
        except KeyError:
            raise InputError(f"Unknown vertex id {vertex_id}") from None

    def has_vertex(self, vertex_id: int) -> bool:
        return vertex_id in self._by_id

    def is_terminal(self, vertex_id: int) -> bool:
        return vertex_id not in self._succ

    def reads(self, vertex_id: int) -> Tuple[int, int]:
        """(i, j) of a nonterminal."""
        return self._reads[vertex_id]

    def successors(self, vertex_id: int) -> Tuple[int, int, int, int]:
        return self._succ[vertex_id]

    @property
    def ids(self) -> Tuple[int, ...]:
        return tuple(sorted(self._by_id))

    @property
    def terminal_ids(self) -> FrozenSet[int]:
        return frozenset(v for v in self._by_id if v not in self._succ)

    @property
    def graph(self) -> nx.DiGraph:
        return self._graph

    @property
    def topological_order(self) -> Tuple[int, ...]:
        return self._order

    @property
    def start_vertex(self) -> int:
        if self.start is None:
            raise InputError("Program has no designated start vertex")
        return self.start

    def satisfies(self, discipline: AccessDiscipline) -> bool:
        """Check the index constraints of a discipline on every nonterminal-to-nonterminal edge."""
        key = f"discipline:{discipline.value}"
        if key not in self._cache:
            self._cache[key] = int(self._check_discipline(discipline))
        return bool(self._cache[key])

    def _check_discipline(self, discipline: AccessDiscipline) -> bool:
        if discipline == AccessDiscipline.UNRESTRICTED:
            return True
        check_i = discipline in (AccessDiscipline.S_OW, AccessDiscipline.S_R)
        check_j = discipline in (AccessDiscipline.R_OW, AccessDiscipline.S_OW)
        for u, targets in self._succ.items():
            i, j = self._reads[u]
            for w in set(targets):
                if w not in self._succ:
                    continue
                wi, wj = self._reads[w]
                if check_i and abs(wi - i) > 1:
                    return False
                if check_j and wj not in (j, j + 1):
                    return False
        return True

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RandomizedBranchingProgram):
            return NotImplemented
        return (self.n, self.m, self.vertices, self.start, self.accept, self.output_bits) == (
            other.n, other.m, other.vertices, other.start, other.accept, other.output_bits
        )

    __hash__ = None


class RandomProgramSpec(BaseModel):
    """Shape of a generated layered test program."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n: int = Field(..., ge=1)
    m: int = Field(..., ge=1)
    width: int = Field(..., ge=1)
    depth: int = Field(..., ge=0)
    discipline: AccessDiscipline = AccessDiscipline.R_OW
