"""Homology lattice of a graph, its Voronoi cell, and brute-force moment oracles.

Points of ``H_1(G, R)`` are handled in two ways: as 1-chains (length-``m``
coefficient vectors) and as coordinates in a :class:`LatticeBasis`.  The
inner product is ``[e, e] = length(e)`` on edges.

Nearest-lattice-vector search is a plain box enumeration around the rounded
coordinates in an LLL-reduced basis, with a distance certificate for the
box (see ``_closest``).  Meant for the small genera the oracles run on.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from .errors import GenusZeroError, SamplingError, SearchRadiusError
from .graph import OneChain, WeightedGraph, betti_number, _components
from .kernel import PotentialKernel
from .trees import TreeEnsemble

DEFAULT_RADIUS = 2
_CHUNK_CELLS = 1 << 22


def fundamental_circuit(g: WeightedGraph, tree: Sequence[int], e: int) -> np.ndarray:
    """Integer chain of the unique circuit in ``tree + e``, with coefficient +1 on ``e``."""
    e = g.check_edge(e)
    tree = set(tree)
    if e in tree:
        raise ValueError(f"edge {e} belongs to the tree")
    adj: dict[int, list[int]] = {i: [] for i in range(g.n)}
    for f in tree:
        adj[int(g.tails[f])].append(f)
        adj[int(g.heads[f])].append(f)
    # walk the tree from head(e) back to tail(e)
    start, goal = int(g.heads[e]), int(g.tails[e])
    via = {start: None}
    stack = [start]
    while stack:
        a = stack.pop()
        if a == goal:
            break
        for f in adj[a]:
            b = int(g.heads[f]) if int(g.tails[f]) == a else int(g.tails[f])
            if b not in via:
                via[b] = (f, a)
                stack.append(b)
    if goal not in via:
        raise ValueError("edge set is not a spanning tree")
    chain = np.zeros(g.m, dtype=np.int64)
    chain[e] = 1
    b = goal
    while via[b] is not None:
        f, a = via[b]
        chain[f] += 1 if int(g.tails[f]) == a else -1
        b = a
    return chain


def first_spanning_tree(g: WeightedGraph) -> tuple[int, ...]:
    """Lexicographically smallest spanning tree (greedy in edge order)."""
    chosen: list[int] = []
    for e in range(g.m):
        pairs = [(g.tails[f], g.heads[f]) for f in chosen + [e]]
        if _components(g.n, pairs) == g.n - len(chosen) - 1:
            chosen.append(e)
    return tuple(chosen)


def _gram_schmidt(G: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = G.shape[0]
    mu = np.zeros((n, n))
    bstar = np.zeros(n)
    for i in range(n):
        for j in range(i):
            mu[i, j] = (G[i, j] - np.dot(mu[j, :j] * mu[i, :j], bstar[:j])) / bstar[j]
        bstar[i] = G[i, i] - np.dot(mu[i, :i] ** 2, bstar[:i])
    return mu, bstar


def lll_reduce(G: np.ndarray, delta: float = 0.75) -> np.ndarray:
    """Unimodular ``U`` such that ``U @ G @ U.T`` is an LLL-reduced Gram matrix."""
    n = G.shape[0]
    U = np.eye(n, dtype=np.int64)
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            mu, _ = _gram_schmidt(U @ G @ U.T)
            r = round(mu[k, j])
            if r:
                U[k] -= r * U[j]
        mu, bstar = _gram_schmidt(U @ G @ U.T)
        if bstar[k] >= (delta - mu[k, k - 1] ** 2) * bstar[k - 1]:
            k += 1
        else:
            U[[k - 1, k]] = U[[k, k - 1]]
            k = max(k - 1, 1)
    return U


def _box(g: int, K: int) -> np.ndarray:
    return np.array(list(itertools.product(range(-K, K + 1), repeat=g)), dtype=float)


def _box_min(G, d, offsets):
    """Min over ``offsets`` of ``[d - o, d - o]`` and the minimizing offset index."""
    A = d @ G
    ogo = np.einsum("ij,jk,ik->i", offsets, G, offsets)
    d2 = np.sum(d * A, axis=1)[:, None] - 2.0 * (A @ offsets.T) + ogo[None, :]
    arg = np.argmin(d2, axis=1)
    return d2[np.arange(len(d)), arg], arg


def _closest(G: np.ndarray, alphas: np.ndarray, K: int) -> tuple[np.ndarray, np.ndarray]:
    """Squared distance to, and coordinates of, the nearest lattice point.

    ``alphas`` is ``(N, g)`` in a basis with Gram ``G``.  The search covers
    the box of half-width ``K`` around the rounded coordinates.  Any lattice
    point outside that box is at squared distance at least
    ``(K + 1/2)^2 / max(diag(G^-1))``; points whose best distance is below
    that bound are certified, the rest are re-searched in the ``K + 1`` box
    and SearchRadiusError is raised if that finds a strictly closer point.
    """
    if K < 1:
        raise ValueError("search radius must be at least 1")
    alphas = np.atleast_2d(np.asarray(alphas, dtype=float))
    N, g = alphas.shape
    offsets = _box(g, K)
    bound = (K + 0.5) ** 2 / float(np.max(np.diag(np.linalg.inv(G))))
    scale = float(np.max(np.diag(G)))
    step = max(1, _CHUNK_CELLS // len(offsets))
    dist = np.empty(N)
    nearest = np.empty((N, g))
    wide = None
    for s in range(0, N, step):
        a = alphas[s : s + step]
        c = np.round(a)
        d = a - c
        best, arg = _box_min(G, d, offsets)
        unsure = np.flatnonzero(best >= bound * (1.0 - 1e-12))
        if len(unsure):
            if wide is None:
                wide = _box(g, K + 1)
            best2, _ = _box_min(G, d[unsure], wide)
            if np.any(best2 < best[unsure] - 1e-12 * scale):
                raise SearchRadiusError(f"nearest lattice vector lies outside the radius-{K} box")
        dist[s : s + step] = np.maximum(best, 0.0)
        nearest[s : s + step] = c + offsets[arg]
    return dist, nearest


@dataclass(frozen=True, eq=False)
class LatticeBasis:
    """Integral basis of ``H_1(G, Z)`` given by fundamental circuits of a reference tree.

    ``circuits`` is the ``g x m`` circuit matrix ``C`` and ``gram = C D C^T``.
    """

    graph: WeightedGraph
    tree: tuple[int, ...]
    circuits: np.ndarray
    gram: np.ndarray

    @property
    def genus(self) -> int:
        return self.circuits.shape[0]

    @cached_property
    def determinant(self) -> float:
        return float(np.linalg.det(self.gram))

    @cached_property
    def _reduction(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        U = lll_reduce(self.gram)
        Uinv = np.rint(np.linalg.inv(U)).astype(np.int64)
        return U, Uinv, U @ self.gram @ U.T

    def reduced(self) -> "LatticeBasis":
        """The same lattice in an LLL-reduced basis."""
        U, _, Gr = self._reduction
        return LatticeBasis(self.graph, self.tree, U @ self.circuits, Gr)

    def coordinates(self, chain) -> np.ndarray:
        """Basis coordinates of a cycle (or ``(N, m)`` stack of cycles)."""
        z = chain.coefficients if isinstance(chain, OneChain) else np.asarray(chain, float)
        rhs = (z * self.graph.lengths) @ self.circuits.T
        return np.linalg.solve(self.gram, rhs.T).T

    def chain(self, coords) -> np.ndarray:
        return np.asarray(coords, dtype=float) @ self.circuits

    def pairing(self, a, b) -> float:
        return float(np.asarray(a) @ self.gram @ np.asarray(b))

    def closest(self, coords, radius: int = DEFAULT_RADIUS) -> tuple[np.ndarray, np.ndarray]:
        """``(squared distances, nearest lattice coordinates)`` for ``(N, g)`` points."""
        _, Uinv, Gr = self._reduction
        red = np.atleast_2d(coords) @ Uinv
        d2, lam = _closest(Gr, red, radius)
        U = self._reduction[0]
        return d2, np.rint(lam @ U).astype(np.int64)


def homology_basis(g: WeightedGraph, t0: Sequence[int] | None = None) -> LatticeBasis:
    genus = betti_number(g)
    if genus < 1:
        raise GenusZeroError("graph has no cycles")
    tree = tuple(sorted(first_spanning_tree(g) if t0 is None else t0))
    if len(tree) != g.n - 1:
        raise ValueError("reference tree has the wrong size")
    inside = set(tree)
    C = np.array([fundamental_circuit(g, tree, e) for e in range(g.m) if e not in inside])
    G = (C * g.lengths) @ C.T
    return LatticeBasis(g, tree, C, G)


def voronoi_membership(lb: LatticeBasis, z, radius: int = DEFAULT_RADIUS, tol: float = 1e-12):
    """``(is_member, nearest)`` for a point given in basis coordinates.

    Ties with the origin count as membership (the cell is closed).
    """
    z = np.asarray(z, dtype=float)
    d2, lam = lb.closest(z[None, :], radius)
    zz = lb.pairing(z, z)
    member = zz <= d2[0] + tol * max(1.0, zz)
    nearest = np.zeros(lb.genus, dtype=np.int64) if member else lam[0]
    return bool(member), nearest


def theta_value(lb: LatticeBasis, z, radius: int = DEFAULT_RADIUS) -> float:
    """Tropical Riemann theta function ``min_l [z, l] + [l, l] / 2``.

    Minimized over the box around ``-round(z)`` in reduced coordinates and
    checked for stability against the next larger box.
    """
    _, Uinv, Gr = lb._reduction
    z = np.asarray(z, dtype=float) @ Uinv

    def box_min(K):
        lam = -np.round(z) + _box(len(z), K)
        vals = lam @ (Gr @ z) + 0.5 * np.einsum("ij,jk,ik->i", lam, Gr, lam)
        return float(np.min(vals))

    best = box_min(radius)
    if box_min(radius + 1) < best - 1e-12 * max(1.0, abs(best)):
        raise SearchRadiusError(f"theta minimizer lies outside the radius-{radius} box")
    return best


@dataclass(frozen=True, eq=False)
class Parallelotope:
    """Cell ``sigma_T + C_T`` of the tree decomposition of the Voronoi cell.

    ``generators`` holds ``pi(e)`` for the edges outside ``T`` (one row each,
    scaled by coefficients in ``[-1/2, 1/2]``); ``circuits`` holds the matching
    fundamental circuits, whose pairings recover those coefficients.
    """

    tree: tuple[int, ...]
    weight: float
    center: OneChain
    nontree: tuple[int, ...]
    generators: np.ndarray
    circuits: np.ndarray
    volume: float

    def coefficients(self, chains: np.ndarray, lengths: np.ndarray) -> np.ndarray:
        """Generator coefficients of ``(N, m)`` points relative to the center."""
        diff = np.atleast_2d(chains) - self.center.coefficients
        return (diff * lengths) @ self.circuits.T / lengths[list(self.nontree)]


def _rooted(ensemble: TreeEnsemble, k: PotentialKernel, q: str) -> TreeEnsemble:
    if ensemble.trees and ensemble.trees[0].root == q:
        return ensemble
    return ensemble.rooted_at(k, q)


def cell_decomposition(
    g: WeightedGraph, k: PotentialKernel, ensemble: TreeEnsemble, q: str
) -> list[Parallelotope]:
    if betti_number(g) < 1:
        raise GenusZeroError("graph has no cycles")
    P = k.projection_matrices()[0]
    ell = g.lengths
    cells = []
    for t in _rooted(ensemble, k, q):
        inside = set(t.edges)
        nontree = tuple(e for e in range(g.m) if e not in inside)
        gens = P[:, list(nontree)].T
        circ = np.array([fundamental_circuit(g, t.edges, e) for e in nontree], dtype=float)
        gram = (gens * ell) @ gens.T
        vol = math.sqrt(max(float(np.linalg.det(gram)), 0.0))
        cells.append(Parallelotope(t.edges, t.weight, t.center, nontree, gens, circ, vol))
    return cells


@dataclass(frozen=True)
class LocationStats:
    samples: int
    attempts: int
    acceptance: float
    covered: int
    uncovered: int
    clear: int
    clear_single: int
    near_boundary: int
    max_multiplicity: int


def voronoi_bounding_box(lb: LatticeBasis, cells: Sequence[Parallelotope]) -> np.ndarray:
    """Half-widths of the tight coordinate box around Vor(0).

    Vor(0) is half the zonotope of all ``pi(e)``; every non-bridge edge is a
    generator of some cell and bridges project to zero.
    """
    gens = {}
    for cell in cells:
        for e, row in zip(cell.nontree, cell.generators):
            gens.setdefault(e, row)
    A = lb.coordinates(np.array([gens[e] for e in sorted(gens)]))
    return 0.5 * np.sum(np.abs(A), axis=0)


def sample_voronoi(lb, half, samples, seed, radius=DEFAULT_RADIUS, min_acceptance=1e-3):
    """Uniform points of Vor(0) (basis coordinates) by rejection from the box ``[-half, half]``."""
    rng = np.random.Generator(np.random.Philox(key=seed))
    accepted = []
    attempts = 0
    have = 0
    batch = max(1024, 2 * samples)
    while have < samples:
        pts = rng.uniform(-half, half, size=(batch, lb.genus))
        attempts += batch
        d2, _ = lb.closest(pts, radius)
        zz = np.einsum("ij,jk,ik->i", pts, lb.gram, pts)
        keep = pts[zz <= d2 + 1e-12 * np.maximum(1.0, zz)]
        accepted.append(keep)
        have += len(keep)
        if have / attempts < min_acceptance:
            raise SamplingError(f"acceptance {have / attempts:.3g} below {min_acceptance}")
    pts = np.concatenate(accepted)[:samples]
    return pts, attempts


def decomposition_point_location(
    cells: Sequence[Parallelotope],
    lb: LatticeBasis,
    samples: int,
    seed: int,
    tol: float = 1e-9,
    radius: int = DEFAULT_RADIUS,
) -> LocationStats:
    """Locate uniform random points of Vor(0) in the tree cells.

    A point is *clear* when it is farther than ``tol`` (in generator
    coefficients) from every cell boundary; clear points must lie in exactly
    one cell.
    """
    half = voronoi_bounding_box(lb, cells)
    pts, attempts = sample_voronoi(lb, half, samples, seed, radius)
    chains = lb.chain(pts)
    ell = lb.graph.lengths
    inside = np.zeros(len(pts), dtype=int)
    near = np.zeros(len(pts), dtype=bool)
    for cell in cells:
        beta = np.max(np.abs(cell.coefficients(chains, ell)), axis=1)
        inside += beta <= 0.5 + tol
        near |= np.abs(beta - 0.5) <= tol
    clear = ~near
    return LocationStats(
        samples=len(pts),
        attempts=attempts,
        acceptance=len(pts) / attempts,
        covered=int(np.sum(inside >= 1)),
        uncovered=int(np.sum(inside == 0)),
        clear=int(np.sum(clear)),
        clear_single=int(np.sum(clear & (inside == 1))),
        near_boundary=int(np.sum(near)),
        max_multiplicity=int(inside.max(initial=0)),
    )


def moment_by_trees(g: WeightedGraph, k: PotentialKernel, ensemble: TreeEnsemble, q: str) -> float:
    """Tropical moment by exact integration over the tree cells of Vor(0)."""
    if betti_number(g) < 1:
        return 0.0
    ell = g.lengths
    fl = k.foster * ell
    values = []
    for t in _rooted(ensemble, k, q):
        sigma = t.center.coefficients
        inside = np.zeros(g.m, dtype=bool)
        inside[list(t.edges)] = True
        values.append(float(sigma @ (ell * sigma)) + math.fsum(fl[~inside]) / 12.0)
    return ensemble.average(values)


class MonteCarloEstimate(NamedTuple):
    estimate: float
    stderr: float


def moment_by_theta_montecarlo(
    lb: LatticeBasis,
    samples: int,
    seed: int,
    radius: int = DEFAULT_RADIUS,
    chunk: int = 1 << 16,
) -> MonteCarloEstimate:
    """Haar average of ``min_l [z - l, z - l]`` over the torus.

    Points are drawn uniformly in the fundamental parallelepiped of the
    reduced basis.  Chunk ``i`` uses its own Philox stream
    ``Philox(key=seed).jumped(i)``; a fixed ``(seed, chunk)`` pair gives
    the same estimate however the chunks are scheduled.
    """
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    _, _, Gr = lb._reduction
    out = np.empty(samples)
    base = np.random.Philox(key=seed)
    for i, s in enumerate(range(0, samples, chunk)):
        n = min(chunk, samples - s)
        rng = np.random.Generator(base.jumped(i))
        pts = rng.random((n, lb.genus))
        out[s : s + n], _ = _closest(Gr, pts, radius)
    mean = float(np.mean(out))
    stderr = float(np.std(out, ddof=1) / math.sqrt(samples))
    return MonteCarloEstimate(mean, stderr)
