"""Undirected graph topologies and edge-removal masks.

Nodes are 1-indexed everywhere in the public API. An undirected edge is
stored as the ordered pair (i, j) with i < j. Masks remove edges from a
base graph; they never add edges.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidMaskError, InvalidSizeError

# enumerate_masks is exponential in the edge count; cap it well before that hurts
MAX_MASK_EDGES = 16


def _normalize_edge(i: int, j: int) -> tuple[int, int]:
    if i == j:
        raise InvalidSizeError(f"self-loop edge ({i}, {j}) is not allowed")
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class Graph:
    """Undirected graph on nodes 1..n."""

    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidSizeError(f"graph needs at least one node, got n={self.n}")
        norm = frozenset(_normalize_edge(i, j) for i, j in self.edges)
        object.__setattr__(self, "edges", norm)
        for i, j in norm:
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise InvalidSizeError(f"edge ({i}, {j}) outside nodes 1..{self.n}")

    def neighbors(self, i: int) -> tuple[int, ...]:
        out = [b if a == i else a for a, b in self.edges if i in (a, b)]
        return tuple(sorted(out))

    def sorted_edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self.edges))

    def has_edge(self, i: int, j: int) -> bool:
        return _normalize_edge(i, j) in self.edges

    def adjacency(self) -> np.ndarray:
        """Dense 0-based symmetric adjacency matrix (int8)."""
        a = np.zeros((self.n, self.n), dtype=np.int8)
        for i, j in self.edges:
            a[i - 1, j - 1] = 1
            a[j - 1, i - 1] = 1
        return a

    def to_json_dict(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.sorted_edges()]}

    @classmethod
    def from_json_dict(cls, d: dict) -> "Graph":
        return cls(n=int(d["n"]), edges=frozenset((int(i), int(j)) for i, j in d["edges"]))


@dataclass(frozen=True)
class EdgeMask:
    """Set of edges removed from a base graph. Empty mask removes nothing."""

    removed: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        norm = frozenset(_normalize_edge(i, j) for i, j in self.removed)
        object.__setattr__(self, "removed", norm)

    def validate(self, graph: Graph) -> None:
        extra = self.removed - graph.edges
        if extra:
            raise InvalidMaskError(f"mask removes non-edges {sorted(extra)}")

    def sorted_edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self.removed))

    def to_json_list(self) -> list:
        return [list(e) for e in self.sorted_edges()]

    @classmethod
    def from_json_list(cls, items) -> "EdgeMask":
        return cls(frozenset((int(i), int(j)) for i, j in items))


EMPTY_MASK = EdgeMask()


def make_square_graph() -> Graph:
    """4-node cycle 1-2-3-4-1."""
    return Graph(4, frozenset({(1, 2), (2, 3), (3, 4), (1, 4)}))


def make_line_graph(n: int) -> Graph:
    """Path graph 1-2-...-n."""
    if n < 2:
        raise InvalidSizeError(f"line graph needs n >= 2, got {n}")
    return Graph(n, frozenset((i, i + 1) for i in range(1, n)))


def apply_mask(graph: Graph, mask: EdgeMask) -> Graph:
    mask.validate(graph)
    return Graph(graph.n, graph.edges - mask.removed)


def enumerate_masks(graph: Graph) -> list[EdgeMask]:
    """All 2^|E| masks of `graph` in lexicographic order of their edge tuples."""
    edges = graph.sorted_edges()
    if len(edges) > MAX_MASK_EDGES:
        raise InvalidSizeError(
            f"graph has {len(edges)} edges; enumeration capped at {MAX_MASK_EDGES}"
        )
    subsets = []
    for bits in range(2 ** len(edges)):
        subset = tuple(e for k, e in enumerate(edges) if bits >> k & 1)
        subsets.append(subset)
    subsets.sort()
    return [EdgeMask(frozenset(s)) for s in subsets]
