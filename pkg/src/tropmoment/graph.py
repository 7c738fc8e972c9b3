"""Weighted multigraphs as combinatorial models of metric graphs.

Vertices are opaque string ids, edges are addressed by their integer
position in input order.  The stored ``(tail, head)`` pair of each edge is
the reference orientation used by every matrix in the package.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    ConnectivityError,
    EmptyGraphError,
    GraphError,
    LengthError,
    LoopEdgeError,
)

Edge = tuple[str, str, float]
_TOKEN = re.compile(r"\S+")


def _components(n: int, pairs: Iterable[tuple[int, int]]) -> int:
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    count = n
    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            count -= 1
    return count


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Connected loopless multigraph with positive edge lengths.

    A graph with a single vertex and no edges is allowed (it is what
    contracting every edge of a banana graph leaves behind) and reports
    ``degenerate == True``.
    """

    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]
    _vindex: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vertices = tuple(str(v) for v in self.vertices)
        edges = tuple((str(t), str(h), float(w)) for t, h, w in self.edges)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "edges", edges)
        if not vertices:
            raise EmptyGraphError("graph has no vertices")
        vindex = {v: i for i, v in enumerate(vertices)}
        if len(vindex) != len(vertices):
            raise GraphError("duplicate vertex ids")
        for k, (t, h, w) in enumerate(edges):
            if t not in vindex or h not in vindex:
                raise GraphError(f"edge {k} references an unknown vertex")
            if t == h:
                raise LoopEdgeError(f"edge {k} is a loop at {t!r}")
            if not np.isfinite(w) or w <= 0:
                raise LengthError(f"edge {k} has non-positive length {w!r}")
        object.__setattr__(self, "_vindex", vindex)
        pairs = ((vindex[t], vindex[h]) for t, h, _ in edges)
        if _components(len(vertices), pairs) != 1:
            raise ConnectivityError("graph is not connected")

    def __eq__(self, other):
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return self.vertices == other.vertices and self.edges == other.edges

    def __hash__(self):
        return hash((self.vertices, self.edges))

    @classmethod
    def from_edges(cls, edges: Sequence[tuple], vertices: Sequence[str] | None = None):
        """Build a graph from ``(tail, head, length)`` triples.

        Vertices default to first-appearance order.
        """
        if vertices is None:
            seen: dict[str, None] = {}
            for t, h, _ in edges:
                seen.setdefault(str(t), None)
                seen.setdefault(str(h), None)
            vertices = tuple(seen)
        return cls(tuple(vertices), tuple(tuple(e) for e in edges))

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def degenerate(self) -> bool:
        return self.m == 0

    @cached_property
    def lengths(self) -> np.ndarray:
        arr = np.array([w for _, _, w in self.edges], dtype=float)
        arr.setflags(write=False)
        return arr

    @cached_property
    def tails(self) -> np.ndarray:
        arr = np.array([self._vindex[t] for t, _, _ in self.edges], dtype=np.intp)
        arr.setflags(write=False)
        return arr

    @cached_property
    def heads(self) -> np.ndarray:
        arr = np.array([self._vindex[h] for _, h, _ in self.edges], dtype=np.intp)
        arr.setflags(write=False)
        return arr

    def vertex_index(self, v: str) -> int:
        try:
            return self._vindex[str(v)]
        except KeyError:
            raise IndexError(f"unknown vertex {v!r}") from None

    def check_edge(self, e: int) -> int:
        if isinstance(e, (bool, np.bool_)) or not isinstance(e, (int, np.integer)):
            raise IndexError(f"edge id must be an integer, got {e!r}")
        if not 0 <= e < self.m:
            raise IndexError(f"edge id {e} out of range for m={self.m}")
        return int(e)

    def endpoints(self, e: int) -> tuple[str, str]:
        t, h, _ = self.edges[self.check_edge(e)]
        return t, h

    def length(self, e: int) -> float:
        return self.edges[self.check_edge(e)][2]

    def incident_edges(self, v: str) -> list[int]:
        """Edges with ``v`` as an endpoint, in edge order."""
        i = self.vertex_index(v)
        return [k for k in range(self.m) if self.tails[k] == i or self.heads[k] == i]

    def other_end(self, e: int, v: str) -> str:
        t, h = self.endpoints(e)
        if v == t:
            return h
        if v == h:
            return t
        raise ValueError(f"vertex {v!r} is not an endpoint of edge {e}")

    def parallel_class(self, e: int) -> list[int]:
        """All edges joining the same pair of vertices as ``e`` (``e`` included)."""
        t, h = self.endpoints(e)
        pair = {t, h}
        return [k for k, (a, b, _) in enumerate(self.edges) if {a, b} == pair]

    def is_bridge(self, e: int) -> bool:
        e = self.check_edge(e)
        pairs = ((self.tails[k], self.heads[k]) for k in range(self.m) if k != e)
        return _components(self.n, pairs) > 1

    def with_lengths(self, lengths: Sequence[float]) -> "WeightedGraph":
        if len(lengths) != self.m:
            raise ValueError("need one length per edge")
        return WeightedGraph(
            self.vertices,
            tuple((t, h, float(w)) for (t, h, _), w in zip(self.edges, lengths)),
        )

    def scaled(self, c: float) -> "WeightedGraph":
        return self.with_lengths([c * w for w in self.lengths])

    def to_text(self) -> str:
        return "".join(f"{t} {h} {w!r}\n" for t, h, w in self.edges)


@dataclass(frozen=True)
class OneChain:
    """Real 1-chain, coefficients in the reference orientation basis."""

    coefficients: np.ndarray

    def __post_init__(self):
        arr = np.array(self.coefficients, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "coefficients", arr)

    @classmethod
    def from_oriented_edges(cls, m: int, oriented: Iterable[tuple[int, int]]):
        """Sum of oriented edges given as ``(edge, sign)``; sign -1 means the reverse of the reference orientation."""
        c = np.zeros(m)
        for e, s in oriented:
            c[e] += s
        return cls(c)

    def coefficient(self, e: int, sign: int = 1) -> float:
        """Coefficient of ``e`` (``sign=1``) or of its reverse (``sign=-1``)."""
        return sign * float(self.coefficients[e])

    def pairing(self, other: "OneChain", lengths: np.ndarray) -> float:
        """The inner product with ``[e, e] = length(e)``."""
        return float(np.dot(self.coefficients * lengths, other.coefficients))

    def __add__(self, other):
        return OneChain(self.coefficients + other.coefficients)

    def __sub__(self, other):
        return OneChain(self.coefficients - other.coefficients)

    def __mul__(self, c):
        return OneChain(self.coefficients * c)

    __rmul__ = __mul__

    def __neg__(self):
        return OneChain(-self.coefficients)


@dataclass(frozen=True)
class ContractionResult:
    graph: WeightedGraph
    vertex_map: Mapping[str, str]
    edge_map: Mapping[int, int]
    merged_vertex: str


def parse_graph(text: str) -> WeightedGraph:
    """Parse the edge-list format: one ``tail head length`` per line, ``#`` comments."""
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        tokens = [(m.group(), m.start() + 1) for m in _TOKEN.finditer(line)]
        if not tokens:
            continue
        if len(tokens) != 3:
            col = tokens[3][1] if len(tokens) > 3 else len(line.rstrip()) + 1
            raise GraphError(
                f"expected 'tail head length', got {len(tokens)} fields", lineno, col
            )
        (t, tcol), (h, _), (w, wcol) = tokens
        try:
            length = float(w)
        except ValueError:
            raise LengthError(f"length {w!r} is not a number", lineno, wcol) from None
        if not np.isfinite(length) or length <= 0:
            raise LengthError(f"length {w!r} must be positive and finite", lineno, wcol)
        if t == h:
            raise LoopEdgeError(f"loop edge at vertex {t!r}", lineno, tcol)
        edges.append((t, h, length))
    if not edges:
        raise EmptyGraphError("no edges in input")
    return WeightedGraph.from_edges(edges)


def incidence_matrix(g: WeightedGraph) -> np.ndarray:
    """Signed n x m incidence matrix: +1 at the head, -1 at the tail."""
    B = np.zeros((g.n, g.m))
    cols = np.arange(g.m)
    B[g.heads, cols] = 1.0
    B[g.tails, cols] = -1.0
    return B


def laplacian(g: WeightedGraph) -> np.ndarray:
    """Weighted Laplacian with conductance 1/length per edge."""
    Q = np.zeros((g.n, g.n))
    c = 1.0 / g.lengths
    np.add.at(Q, (g.tails, g.heads), -c)
    np.add.at(Q, (g.heads, g.tails), -c)
    np.add.at(Q, (g.tails, g.tails), c)
    np.add.at(Q, (g.heads, g.heads), c)
    return Q


def betti_number(g: WeightedGraph) -> int:
    return g.m - g.n + 1


def contract_edge(g: WeightedGraph, e: int) -> ContractionResult:
    """Contract ``e`` and drop every edge parallel to it.

    The merged vertex keeps the tail's id and position.
    """
    e = g.check_edge(e)
    u, v, _ = g.edges[e]
    vertex_map = {x: (u if x == v else x) for x in g.vertices}
    vertices = tuple(x for x in g.vertices if x != v)
    edges = []
    edge_map = {}
    for k, (t, h, w) in enumerate(g.edges):
        t2, h2 = vertex_map[t], vertex_map[h]
        if t2 == h2:
            continue
        edge_map[k] = len(edges)
        edges.append((t2, h2, w))
    return ContractionResult(WeightedGraph(vertices, tuple(edges)), vertex_map, edge_map, u)


def subdivide_edge(g: WeightedGraph, e: int, x: float, name: str | None = None) -> WeightedGraph:
    """Insert a valence-2 vertex on ``e`` at distance ``x`` from its tail.

    The new vertex is appended; ``e`` becomes ``tail -> new`` and a new edge
    ``new -> head`` is appended, so other edge ids are unchanged.
    """
    e = g.check_edge(e)
    t, h, w = g.edges[e]
    if not 0 < x < w:
        raise ValueError("subdivision point must be interior to the edge")
    if name is None:
        name = f"_s{e}"
        while name in g._vindex:
            name += "_"
    edges = list(g.edges)
    edges[e] = (t, name, x)
    edges.append((name, h, w - x))
    return WeightedGraph(g.vertices + (name,), tuple(edges))
