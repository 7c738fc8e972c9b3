"""Spanning trees, weight-random tree probabilities, star sums, energy levels.

A spanning tree ``T`` is drawn with probability ``w(T) / w(G)`` where
``w(T)`` is the product of the lengths of the edges *not* in ``T``.  The
closed forms here are checked against exhaustive enumeration in the tests.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import EnumerationCapError, TreeError
from .graph import OneChain, WeightedGraph, _components, laplacian
from .kernel import PotentialKernel

DEFAULT_CAP = 10**6


@dataclass(frozen=True)
class SpanningTreeRecord:
    edges: tuple[int, ...]
    weight: float
    coweight: float
    root: str | None = None
    orientation: tuple[tuple[int, int], ...] | None = None
    center: OneChain | None = None
    energy: float | None = None


@dataclass(frozen=True)
class TreeEnsemble:
    graph: WeightedGraph
    trees: tuple[SpanningTreeRecord, ...]
    weight_total: float
    coweight_total: float

    def __len__(self):
        return len(self.trees)

    def __iter__(self):
        return iter(self.trees)

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([t.weight for t in self.trees]) / self.weight_total

    def average(self, values: Iterable[float]) -> float:
        """``sum_T w(T) * value_T / w(G)`` accumulated with ``math.fsum``."""
        return math.fsum(t.weight * v for t, v in zip(self.trees, values)) / self.weight_total

    def rooted_at(self, k: PotentialKernel, q: str) -> "TreeEnsemble":
        """Copy with orientation, center and energy level filled in for root ``q``."""
        g = self.graph
        P = k.projection_matrices()[0]
        signs = np.zeros((len(self.trees), g.m))
        records = []
        for i, t in enumerate(self.trees):
            orient = rooted_orientation(g, t.edges, q)
            for e, s in orient:
                signs[i, e] = s
            records.append(orient)
        energies = _energy_levels(k, [t.edges for t in self.trees], q)
        centers = 0.5 * signs @ P.T
        trees = tuple(
            replace(t, root=q, orientation=o, center=OneChain(c), energy=float(en))
            for t, o, c, en in zip(self.trees, records, centers, energies)
        )
        return replace(self, trees=trees)


def unweighted_tree_count(g: WeightedGraph) -> float:
    """Number of spanning trees (Kirchhoff determinant on unit lengths)."""
    if g.n == 1:
        return 1.0
    Q = laplacian(g.with_lengths([1.0] * g.m))[1:, 1:]
    sign, logdet = np.linalg.slogdet(Q)
    return float(round(math.exp(logdet))) if logdet < 700 else math.inf


def tree_count_weighted(g: WeightedGraph) -> tuple[float, float]:
    """``(w(G), w'(G))`` via the weighted matrix-tree theorem."""
    if g.n == 1:
        return math.prod(g.lengths.tolist()), 1.0
    Q = laplacian(g)[1:, 1:]
    sign, logdet = np.linalg.slogdet(Q)
    coweight = math.exp(logdet)
    weight = math.exp(logdet + float(np.sum(np.log(g.lengths))))
    return weight, coweight


def enumerate_spanning_trees(g: WeightedGraph, cap: int = DEFAULT_CAP) -> TreeEnsemble:
    """Every spanning tree exactly once, in lexicographic order of sorted edge ids.

    Include/exclude recursion on edges in id order; an edge is excluded only
    if the remaining edges still connect the graph.
    """
    count = unweighted_tree_count(g)
    if count > cap:
        raise EnumerationCapError(cap, count)
    n, m = g.n, g.m
    tails, heads = g.tails.tolist(), g.heads.tolist()
    found: list[tuple[int, ...]] = []

    def find(parent, a):
        while parent[a] != a:
            a = parent[a]
        return a

    def rec(i, chosen, parent):
        if len(chosen) == n - 1:
            found.append(tuple(chosen))
            return
        if i == m:
            return
        a, b = find(parent, tails[i]), find(parent, heads[i])
        if a != b:
            p2 = list(parent)
            p2[a] = b
            rec(i + 1, chosen + [i], p2)
        rest = [(tails[k], heads[k]) for k in chosen] + [
            (tails[k], heads[k]) for k in range(i + 1, m)
        ]
        if _components(n, rest) == 1:
            rec(i + 1, chosen, parent)

    rec(0, [], list(range(n)))
    lengths = g.lengths.tolist()
    records = []
    for t in found:
        inside = set(t)
        w = math.prod(lengths[k] for k in range(m) if k not in inside)
        wp = math.prod(1.0 / lengths[k] for k in t)
        records.append(SpanningTreeRecord(t, w, wp))
    return TreeEnsemble(
        g,
        tuple(records),
        math.fsum(r.weight for r in records),
        math.fsum(r.coweight for r in records),
    )


def edge_probability(k: PotentialKernel, e: int) -> float:
    """Probability that ``e`` lies in a weight-random spanning tree."""
    e = k.graph.check_edge(e)
    return float(k.edge_resistances[e] / k.graph.lengths[e])


def pair_probability(g: WeightedGraph, k: PotentialKernel, e: int, f: int) -> float:
    """Probability that both ``e`` and ``f`` lie in the random tree.

    ``P(e) * r(f-, f+; G/e) / l(f)``, the contracted resistance coming from
    the generalized Rayleigh law.
    """
    e, f = g.check_edge(e), g.check_edge(f)
    if e == f:
        return edge_probability(k, e)
    if f in g.parallel_class(e):
        return 0.0
    fu, fv = g.endpoints(f)
    return edge_probability(k, e) * k.rayleigh_contract_r(fu, fv, e) / g.lengths[f]


def star_s(k: PotentialKernel, p: str, method: str = "closed") -> float:
    """Sum of ``P(e)`` over the edges at ``p``."""
    g = k.graph
    edges = g.incident_edges(p)
    if method == "sum":
        return math.fsum(edge_probability(k, e) for e in edges)
    if method != "closed":
        raise ValueError(f"unknown method {method!r}")
    q = k.q
    rp = k.resistance(p, q)
    total = math.fsum((k.resistance(g.other_end(e, p), q) - rp) / g.lengths[e] for e in edges)
    return total + 2.0 - (2.0 if p == q else 0.0)


def star_t(
    g: WeightedGraph,
    k: PotentialKernel,
    p: str,
    e: int,
    method: str = "closed",
    include_self: bool = True,
) -> float:
    """Sum of ``P(e, f)`` over the edges ``f`` at ``p``.

    With ``include_self`` the term ``f = e`` (worth ``P(e)``) is part of the
    sum.  The closed form is naturally a sum over edges not parallel to
    ``e``; the self term is added back explicitly.
    """
    e = g.check_edge(e)
    edges = g.incident_edges(p)
    if method == "sum":
        return math.fsum(
            pair_probability(g, k, e, f) for f in edges if include_self or f != e
        )
    if method != "closed":
        raise ValueError(f"unknown method {method!r}")
    u, v = g.endpoints(e)
    q = k.q
    r = k._edge_r_checked(e)
    c = r / g.lengths[e]
    par = set(g.parallel_class(e))
    rp = k.rayleigh_contract_r(p, q, e)
    total = math.fsum(
        (k.rayleigh_contract_r(g.other_end(f, p), q, e) - rp) / g.lengths[f]
        for f in edges
        if f not in par
    )
    bracket = 1.0 - (p == q)
    if p == u:
        bracket -= k.cross_ratio(u, v, u, q) / r
    if p == v:
        bracket -= k.cross_ratio(v, u, v, q) / r
    value = c * total + 2.0 * c * bracket
    if include_self and p in (u, v):
        value += c
    return value


def rooted_orientation(g: WeightedGraph, t: Sequence[int], q: str) -> tuple[tuple[int, int], ...]:
    """Orient the tree edges away from ``q``.

    Returns ``(edge, sign)`` pairs in edge order; ``sign = +1`` when the
    reference orientation already points away from ``q``.
    """
    t = sorted(set(int(e) for e in t))
    for e in t:
        g.check_edge(e)
    root = g.vertex_index(q)
    if len(t) != g.n - 1:
        raise TreeError(f"{len(t)} edges cannot span {g.n} vertices")
    adj: dict[int, list[int]] = {i: [] for i in range(g.n)}
    for e in t:
        adj[int(g.tails[e])].append(e)
        adj[int(g.heads[e])].append(e)
    sign = {}
    seen = {root}
    queue = deque([root])
    while queue:
        a = queue.popleft()
        for e in adj[a]:
            if e in sign:
                continue
            tail, head = int(g.tails[e]), int(g.heads[e])
            b = head if tail == a else tail
            if b in seen:
                raise TreeError("edge set contains a cycle")
            sign[e] = 1 if tail == a else -1
            seen.add(b)
            queue.append(b)
    if len(seen) != g.n:
        raise TreeError("edge set does not span the graph")
    return tuple((e, sign[e]) for e in t)


def _nu(g: WeightedGraph, t: Sequence[int], q: str) -> np.ndarray:
    deg = np.zeros(g.n)
    np.add.at(deg, g.tails[list(t)], 1.0)
    np.add.at(deg, g.heads[list(t)], 1.0)
    nu = deg - 2.0
    nu[g.vertex_index(q)] += 2.0
    return nu


def _energy_levels(k: PotentialKernel, trees: Sequence[Sequence[int]], q: str) -> np.ndarray:
    g = k.graph
    if not trees:
        return np.zeros(0)
    nus = np.array([_nu(g, t, q) for t in trees])
    return np.einsum("ij,jk,ik->i", nus, k.L, nus)


def energy_level(k: PotentialKernel, t: Sequence[int], q: str, method: str = "quadratic") -> float:
    """Energy level of the tree ``t`` rooted at ``q``.

    ``method="quadratic"`` evaluates the energy of the canonical measure
    ``sum_v (deg_T(v) - 2) delta_v + 2 delta_q``; ``method="double_sum"`` adds
    up the cross ratios of all pairs of rooted tree edges.
    """
    g = k.graph
    if method == "quadratic":
        rooted_orientation(g, t, q)
        nu = _nu(g, t, q)
        return float(nu @ k.L @ nu)
    if method != "double_sum":
        raise ValueError(f"unknown method {method!r}")
    orient = rooted_orientation(g, t, q)
    total = []
    for e, se in orient:
        a, b = g.endpoints(e)[:: se]
        for f, sf in orient:
            c, d = g.endpoints(f)[:: sf]
            total.append(k.cross_ratio(a, b, c, d))
    return math.fsum(total)


def tree_center(k: PotentialKernel, t: Sequence[int], q: str) -> OneChain:
    """Half the projected sum of the rooted tree edges."""
    orient = rooted_orientation(k.graph, t, q)
    chain = OneChain.from_oriented_edges(k.graph.m, orient)
    return OneChain(0.5 * (k.projection_matrices()[0] @ chain.coefficients))


def energy_level_average(k: PotentialKernel, q: str | None = None) -> float:
    """Closed form for the weighted average of energy levels over rooted trees."""
    a, b = k.edge_j_values(q)
    return math.fsum((a * a + b * b) / k.graph.lengths)


def center_norm_average(k: PotentialKernel, q: str | None = None) -> float:
    """Closed form for the weighted average of ``[sigma_T, sigma_T]``."""
    a, b = k.edge_j_values(q)
    ell = k.graph.lengths
    return 0.25 * math.fsum(k.edge_resistances - (a * a + b * b) / ell)
