"""Closed-form invariants of a metric graph and the JSON report built from them."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DomainError
from .graph import WeightedGraph, betti_number
from .kernel import PotentialKernel, build_kernel

DEFAULT_TOLERANCE = 1e-9


def _kernel(g: WeightedGraph, q: str | None, kernel: PotentialKernel | None) -> PotentialKernel:
    if kernel is not None:
        if kernel.graph is not g and kernel.graph != g:
            raise ValueError("kernel was built for a different graph")
        return kernel
    return build_kernel(g, q)


def total_length(g: WeightedGraph) -> float:
    return math.fsum(g.lengths)


def tropical_moment(g: WeightedGraph, q: str | None = None, kernel: PotentialKernel | None = None) -> float:
    """Tropical moment of the Jacobian from Foster coefficients and j-values.

    ``sum_e F(e)^2 l(e) / 12 + sum_e (r(u, v) - (j_u(v, q)^2 + j_v(u, q)^2) / l(e)) / 4``.
    Returns 0 for graphs without cycles.
    """
    if betti_number(g) < 1:
        return 0.0
    k = _kernel(g, q, kernel)
    ell = g.lengths
    F = k.foster
    a, b = k.edge_j_values(q)
    first = math.fsum(F * F * ell) / 12.0
    second = math.fsum(k.edge_resistances - (a * a + b * b) / ell) / 4.0
    return first + second


def tau_invariant(g: WeightedGraph, q: str | None = None, kernel: PotentialKernel | None = None) -> float:
    """Tau invariant: ``sum_e F(e)^2 l(e) / 12 + sum_e (r(u, q) - r(v, q))^2 / (4 l(e))``."""
    if g.m == 0:
        raise DomainError("tau is undefined for a single point")
    k = _kernel(g, q, kernel)
    qq = k.q if q is None else q
    L = k.L
    qi = g.vertex_index(qq)
    # r(x, q) from the kernel regardless of its base vertex
    rq = np.diag(L) + L[qi, qi] - 2.0 * L[:, qi]
    ell = g.lengths
    F = k.foster
    diff = rq[g.tails] - rq[g.heads]
    return math.fsum(F * F * ell) / 12.0 + math.fsum(diff * diff / ell) / 4.0


def linear_identity_residual(g: WeightedGraph, q: str | None = None, kernel: PotentialKernel | None = None) -> float:
    """``tau / 2 + I - l / 8``, zero for every metric graph."""
    k = _kernel(g, q, kernel)
    return tau_invariant(g, q, k) / 2.0 + tropical_moment(g, q, k) - total_length(g) / 8.0


def genus2_local_invariant(g: WeightedGraph) -> float:
    """Local height invariant of a genus-2 dual graph; it is the tropical moment."""
    return tropical_moment(g)


def banana_moment(lengths) -> float:
    """Closed form for ``m`` parallel edges: ``(sum x + (m - 2) / sum 1/x) / 12``."""
    x = [float(v) for v in lengths]
    m = len(x)
    return (math.fsum(x) + (m - 2) / math.fsum(1.0 / v for v in x)) / 12.0


@dataclass
class InvariantReport:
    n: int
    m: int
    genus: int
    total_length: float
    base_vertex: str
    moment: float
    tau: float | None
    identity_residual: float | None
    edges: list[dict[str, Any]]
    tolerance: float = DEFAULT_TOLERANCE
    oracles: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "graph": {
                "n": self.n,
                "m": self.m,
                "genus": self.genus,
                "total_length": self.total_length,
            },
            "base_vertex": self.base_vertex,
            "moment": self.moment,
            "tau": self.tau,
            "identity_residual": self.identity_residual,
            "edges": self.edges,
            "oracles": self.oracles,
            "tolerances": {"relative": self.tolerance},
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())

    @property
    def identity_ok(self) -> bool:
        if self.identity_residual is None:
            return True
        return abs(self.identity_residual) < self.tolerance * max(1.0, self.total_length / 8.0)


def edge_table(k: PotentialKernel) -> list[dict[str, Any]]:
    g = k.graph
    a, b = k.edge_j_values()
    rows = []
    for e, (t, h, w) in enumerate(g.edges):
        rows.append(
            {
                "edge": e,
                "tail": t,
                "head": h,
                "length": w,
                "resistance": float(k.edge_resistances[e]),
                "foster": float(k.foster[e]),
                "j_tail": float(a[e]),
                "j_head": float(b[e]),
            }
        )
    return rows


def invariant_report(g: WeightedGraph, q: str | None = None, tolerance: float = DEFAULT_TOLERANCE) -> InvariantReport:
    """Moment, tau, identity residual and per-edge table for one graph.

    ``j_tail`` is ``j_{e-}(e+, q)`` and ``j_head`` is ``j_{e+}(e-, q)``.
    """
    k = build_kernel(g, q)
    moment = tropical_moment(g, kernel=k)
    tau = tau_invariant(g, kernel=k) if g.m else None
    residual = None if tau is None else tau / 2.0 + moment - total_length(g) / 8.0
    return InvariantReport(
        n=g.n,
        m=g.m,
        genus=betti_number(g),
        total_length=total_length(g),
        base_vertex=k.q,
        moment=moment,
        tau=tau,
        identity_residual=residual,
        edges=edge_table(k),
        tolerance=tolerance,
    )


def _fmt(x: Any) -> str:
    if isinstance(x, bool) or x is None:
        return {True: "true", False: "false", None: "null"}[x]
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return "null"
        return format(x, ".17g")
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, dict):
        return "{" + ", ".join(f"{_fmt(str(k))}: {_fmt(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps(obj: Any) -> str:
    """JSON with key order preserved and every float written with 17 significant digits."""
    return _fmt(obj)
