"""Generalized inverse of the Laplacian and the potential theory built on it.

``PotentialKernel`` stores ``L_q``: the inverse of the reduced Laplacian
(row and column of the base vertex ``q`` deleted) padded back with zeros.
Its entries are the values ``j_q(x, y)``; every other quantity here
(resistance, cross ratios, Foster coefficients, projections) is read off it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateEdgeError,
    DomainError,
    MassError,
    NumericalError,
    PathError,
)
from .graph import OneChain, WeightedGraph, incidence_matrix, laplacian

MASS_TOL = 1e-12
DEGENERATE_REL = 1e-12


@dataclass(frozen=True)
class DiscreteMeasure:
    """Measure on vertices with total mass zero."""

    coefficients: Mapping[str, float]

    def __post_init__(self):
        coeffs = {str(k): float(v) for k, v in self.coefficients.items()}
        total = sum(coeffs.values())
        scale = max([1.0] + [abs(v) for v in coeffs.values()])
        if abs(total) > MASS_TOL * scale:
            raise MassError(f"measure has total mass {total!r}, expected 0")
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def dirac_difference(cls, x: str, y: str) -> "DiscreteMeasure":
        """The measure ``delta_x - delta_y``."""
        if x == y:
            return cls({})
        return cls({x: 1.0, y: -1.0})

    def vector(self, g: WeightedGraph) -> np.ndarray:
        v = np.zeros(g.n)
        for k, c in self.coefficients.items():
            v[g.vertex_index(k)] += c
        return v


@dataclass(frozen=True, eq=False)
class PotentialKernel:
    graph: WeightedGraph
    q: str
    L: np.ndarray = field(repr=False)

    def _ix(self, v) -> int:
        return self.graph.vertex_index(v)

    def j_value(self, x: str, y: str, base: str | None = None) -> float:
        """``j_z(x, y)`` with ``z = base`` (defaults to the kernel's own base)."""
        i, k = self._ix(x), self._ix(y)
        if base is None or base == self.q:
            return float(self.L[i, k])
        z = self._ix(base)
        L = self.L
        return float(L[i, k] - L[i, z] - L[z, k] + L[z, z])

    def resistance(self, x: str, y: str) -> float:
        i, k = self._ix(x), self._ix(y)
        L = self.L
        return float(L[i, i] + L[k, k] - 2.0 * L[i, k])

    def resistance_point(self, e: int, x: float, p2: str) -> float:
        """Resistance from the point at distance ``x`` from the tail of ``e`` to vertex ``p2``."""
        g = self.graph
        ell = g.length(e)
        if not 0.0 <= x <= ell:
            raise DomainError(f"distance {x!r} outside [0, {ell!r}]")
        u, v = g.endpoints(e)
        s = x / ell
        return (
            (1.0 - s) * self.resistance(u, p2)
            + s * self.resistance(v, p2)
            + self.foster_coefficient(e) * (ell - x) * s
        )

    def cross_ratio(self, x: str, y: str, z: str, w: str) -> float:
        L = self.L
        a, b, c, d = (self._ix(t) for t in (x, y, z, w))
        return float(L[a, c] + L[b, d] - L[a, d] - L[b, c])

    def energy_pairing(self, nu1: DiscreteMeasure, nu2: DiscreteMeasure) -> float:
        for nu in (nu1, nu2):
            if not isinstance(nu, DiscreteMeasure):
                raise TypeError("energy_pairing expects DiscreteMeasure arguments")
        a = nu1.vector(self.graph)
        b = nu2.vector(self.graph)
        return float(a @ self.L @ b)

    @cached_property
    def edge_resistances(self) -> np.ndarray:
        """``r(e-, e+)`` for every edge."""
        g = self.graph
        L = self.L
        t, h = g.tails, g.heads
        r = L[t, t] + L[h, h] - 2.0 * L[t, h]
        r.setflags(write=False)
        return r

    @cached_property
    def foster(self) -> np.ndarray:
        F = 1.0 - self.edge_resistances / self.graph.lengths
        F.setflags(write=False)
        return F

    def foster_coefficient(self, e: int) -> float:
        return float(self.foster[self.graph.check_edge(e)])

    @cached_property
    def _xi(self) -> np.ndarray:
        B = incidence_matrix(self.graph)
        Xi = B.T @ self.L @ B
        Xi = 0.5 * (Xi + Xi.T)
        Xi.setflags(write=False)
        return Xi

    def cross_ratio_matrix(self) -> np.ndarray:
        """``Xi[e, f] = xi(e-, e+, f-, f+)``."""
        return self._xi

    @cached_property
    def _projections(self) -> tuple[np.ndarray, np.ndarray]:
        ell = self.graph.lengths
        Xi = self._xi
        P = np.eye(self.graph.m) - Xi / ell[:, None]
        Pp = Xi / ell[None, :]
        P.setflags(write=False)
        Pp.setflags(write=False)
        return P, Pp

    def projection_matrices(self) -> tuple[np.ndarray, np.ndarray]:
        """``(P, P')``: ``P`` projects onto cycles, ``P'.T`` onto their orthogonal complement.

        Column ``f`` of ``P`` holds the coefficients of ``pi(f)``.
        """
        return self._projections

    def project(self, chain: OneChain) -> OneChain:
        return OneChain(self._projections[0] @ chain.coefficients)

    def project_complement(self, chain: OneChain) -> OneChain:
        return OneChain(self._projections[1].T @ chain.coefficients)

    def walk_chain(self, y: str, x: str, path: Sequence[int]) -> OneChain:
        """1-chain of an edge walk starting at ``y`` and ending at ``x``."""
        g = self.graph
        coeff = np.zeros(g.m)
        cur = y
        g.vertex_index(y)
        g.vertex_index(x)
        for e in path:
            t, h = g.endpoints(e)
            if cur == t:
                coeff[e] += 1.0
                cur = h
            elif cur == h:
                coeff[e] -= 1.0
                cur = t
            else:
                raise PathError(f"edge {e} does not leave vertex {cur!r}")
        if cur != x:
            raise PathError(f"walk ends at {cur!r}, expected {x!r}")
        return OneChain(coeff)

    def resistance_via_projection(self, x: str, y: str, path: Sequence[int]) -> float:
        """``[gamma, pi'(gamma)]`` for the chain of a walk from ``y`` to ``x``."""
        gamma = self.walk_chain(y, x, path)
        return gamma.pairing(self.project_complement(gamma), self.graph.lengths)

    def edge_j_values(self, q: str | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Per-edge ``(j_{e-}(e+, q), j_{e+}(e-, q))``.

        Uses ``j_x(y, q) = j_q(x, x) - j_q(x, y)`` with the kernel rebased at ``q``.
        """
        g = self.graph
        L = self.L
        qi = self._ix(self.q if q is None else q)
        t, h = g.tails, g.heads
        # rebase: j_q(x, y) = L[x, y] - L[x, q] - L[q, y] + L[q, q]
        def jq(a, b):
            return L[a, b] - L[a, qi] - L[qi, b] + L[qi, qi]

        a = jq(t, t) - jq(t, h)
        b = jq(h, h) - jq(h, t)
        return a, b

    def _edge_r_checked(self, e: int) -> float:
        e = self.graph.check_edge(e)
        r = float(self.edge_resistances[e])
        if r < DEGENERATE_REL * self.graph.lengths[e]:
            raise DegenerateEdgeError(f"edge {e} has effective resistance {r!r}")
        return r

    def rayleigh_contract_j(self, x: str, y: str, z: str, e: int) -> float:
        """``j_z(x, y)`` on the graph with ``e`` contracted, computed on the original graph."""
        r = self._edge_r_checked(e)
        u, v = self.graph.endpoints(e)
        return self.j_value(x, y, base=z) - (
            self.cross_ratio(x, z, u, v) * self.cross_ratio(y, z, u, v) / r
        )

    def rayleigh_contract_r(self, x: str, y: str, e: int) -> float:
        """``r(x, y)`` on the graph with ``e`` contracted."""
        r = self._edge_r_checked(e)
        u, v = self.graph.endpoints(e)
        return self.resistance(x, y) - self.cross_ratio(x, y, u, v) ** 2 / r


def _reduced_inverse(Q: np.ndarray, qi: int) -> np.ndarray:
    n = Q.shape[0]
    L = np.zeros((n, n))
    if n == 1:
        return L
    keep = np.r_[0:qi, qi + 1 : n]
    Qq = Q[np.ix_(keep, keep)]
    try:
        factor = scipy.linalg.cho_factor(Qq, lower=True, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"reduced Laplacian is not positive definite: {exc}") from None
    inv = scipy.linalg.cho_solve(factor, np.eye(n - 1), check_finite=False)
    inv = 0.5 * (inv + inv.T)
    if not np.all(np.isfinite(inv)):
        raise NumericalError("reduced Laplacian inverse is not finite")
    L[np.ix_(keep, keep)] = inv
    return L


def build_kernel(g: WeightedGraph, q: str | None = None) -> PotentialKernel:
    """Kernel based at ``q`` (default: the first vertex).

    Kernels are cached per ``(graph, q)``.
    """
    if q is None:
        q = g.vertices[0]
    qi = g.vertex_index(q)
    return _cached_kernel(g, g.vertices[qi])


@lru_cache(maxsize=32)
def _cached_kernel(g: WeightedGraph, q: str) -> PotentialKernel:
    L = _reduced_inverse(laplacian(g), g.vertex_index(q))
    L.setflags(write=False)
    return PotentialKernel(g, q, L)
