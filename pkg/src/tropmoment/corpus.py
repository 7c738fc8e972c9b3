"""Small-graph corpora for the brute-force oracles.

``small_multigraphs`` lists every connected loopless multigraph with at
most ``max_n`` vertices and ``max_m`` edges, one per isomorphism class.
Classes are grown one edge at a time and deduplicated by a canonical form
(minimum over vertex relabelings that sort the degree sequence).
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from .graph import WeightedGraph, _components


def _canonical(n: int, edges: tuple[tuple[int, int], ...]) -> tuple[tuple[int, int], ...]:
    deg = [0] * n
    for a, b in edges:
        deg[a] += 1
        deg[b] += 1
    # only relabelings listing vertices in nondecreasing degree order
    classes: dict[int, list[int]] = {}
    for v in range(n):
        classes.setdefault(deg[v], []).append(v)
    groups = [classes[d] for d in sorted(classes)]
    best = None
    for parts in itertools.product(*(itertools.permutations(gr) for gr in groups)):
        order = [v for part in parts for v in part]
        label = {v: i for i, v in enumerate(order)}
        form = tuple(sorted(tuple(sorted((label[a], label[b]))) for a, b in edges))
        if best is None or form < best:
            best = form
    return best


@lru_cache(maxsize=None)
def _classes(n: int, max_m: int) -> tuple[tuple[tuple[tuple[int, int], ...], ...], ...]:
    pairs = list(itertools.combinations(range(n), 2))
    levels = [{()}]
    for _ in range(max_m):
        nxt = set()
        for edges in levels[-1]:
            for p in pairs:
                nxt.add(_canonical(n, tuple(sorted(edges + (p,)))))
        levels.append(nxt)
    return tuple(tuple(sorted(level)) for level in levels)


def small_multigraphs(max_n: int = 5, max_m: int = 8, min_n: int = 2) -> list[WeightedGraph]:
    """Every connected loopless multigraph up to isomorphism, with unit lengths."""
    out = []
    for n in range(min_n, max_n + 1):
        for m, level in enumerate(_classes(n, max_m)):
            if m < n - 1:
                continue
            for edges in level:
                if _components(n, edges) != 1:
                    continue
                out.append(
                    WeightedGraph(
                        tuple(f"v{i}" for i in range(n)),
                        tuple((f"v{a}", f"v{b}", 1.0) for a, b in edges),
                    )
                )
    return out


def random_lengths(g: WeightedGraph, rng: np.random.Generator, low=0.1, high=10.0) -> WeightedGraph:
    """Same graph with lengths drawn from rationals ``k / 20`` in ``[low, high]``."""
    ks = rng.integers(int(round(low * 20)), int(round(high * 20)) + 1, size=g.m)
    return g.with_lengths((ks / 20.0).tolist())


def random_graph(
    n: int,
    extra: int,
    rng: np.random.Generator,
    low: float = 0.1,
    high: float = 10.0,
    parallel: bool = True,
) -> WeightedGraph:
    """Random connected graph: a random tree plus ``extra`` further edges.

    Extra edges may be parallel to existing ones unless ``parallel`` is False
    (then they are only added between non-adjacent pairs while any remain).
    """
    vertices = tuple(f"v{i}" for i in range(n))
    perm = rng.permutation(n)
    edges = []
    for i in range(1, n):
        a, b = int(perm[i]), int(perm[rng.integers(0, i)])
        edges.append((a, b))
    used = {frozenset(e) for e in edges}
    for _ in range(extra):
        if n < 2:
            break
        for _try in range(100):
            a, b = (int(x) for x in rng.choice(n, size=2, replace=False))
            if parallel or frozenset((a, b)) not in used:
                break
        used.add(frozenset((a, b)))
        edges.append((a, b))
    lengths = rng.uniform(low, high, size=len(edges))
    return WeightedGraph(
        vertices,
        tuple((vertices[a], vertices[b], float(w)) for (a, b), w in zip(edges, lengths)),
    )
