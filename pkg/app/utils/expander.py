"""
The pinned explicit expander on {0,1}^s shared by the walk extractor and the
amplification construction.

For s > 4 it is the circulant graph on Z_(2^s) with generators
(+1, -1, +2^(s//2), -2^(s//2), +3); an edge label is 3 bits read mod 5, so the
graph is an 8-regular multigraph. For s <= 4 it is the complete graph with
self-loops: label l takes v to v + l mod 2^s.
"""

from typing import Iterable, List, Sequence

from app.errors import InputError
from app.utils.bits import Bits, bits_to_int

COMPLETE_GRAPH_MAX_BITS = 4


class Expander:
    def __init__(self, vertex_bits: int):
        if vertex_bits < 0:
            raise InputError(f"Vertex bits must be nonnegative, got {vertex_bits}")
        self.vertex_bits = vertex_bits
        self.order = 1 << vertex_bits
        if vertex_bits <= COMPLETE_GRAPH_MAX_BITS:
            self.label_bits = vertex_bits
            self._generators: List[int] = []
        else:
            half = 1 << (vertex_bits // 2)
            self.label_bits = 3
            self._generators = [1, self.order - 1, half, self.order - half, 3]

    @property
    def is_complete(self) -> bool:
        return not self._generators

    def neighbor(self, vertex: int, label: int) -> int:
        if self.is_complete:
            return (vertex + label) % self.order
        return (vertex + self._generators[label % len(self._generators)]) % self.order

    def walk(self, start: int, labels: Iterable[int]) -> List[int]:
        """Vertices visited, start included."""
        path = [start % self.order]
        for label in labels:
            path.append(self.neighbor(path[-1], label))
        return path

    def labels_from_bits(self, bits: Sequence[int]) -> List[int]:
        if self.label_bits == 0:
            return []
        if len(bits) % self.label_bits:
            raise InputError(f"{len(bits)} label bits is not a multiple of {self.label_bits}")
        return [
            bits_to_int(bits[k:k + self.label_bits])
            for k in range(0, len(bits), self.label_bits)
        ]

    def step_bits(self, vertex: Bits, label: Bits) -> Bits:
        """One step on bit-encoded vertices and labels (little-endian)."""
        target = self.neighbor(bits_to_int(vertex), bits_to_int(label))
        return tuple((target >> k) & 1 for k in range(self.vertex_bits))

    def __repr__(self) -> str:
        kind = "complete" if self.is_complete else "circulant"
        return f"Expander({kind}, 2^{self.vertex_bits} vertices, {self.label_bits}-bit labels)"
