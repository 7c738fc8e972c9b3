"""Command-line front end: ``tropmoment {info,moment,tau,identity,batch}``.

Exit codes: 0 success, 2 parse or validation error, 3 failed check,
4 enumeration cap exceeded.  Wall time goes to stderr so stdout stays
byte-identical across runs.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, TextIO

from .errors import EnumerationCapError, TropMomentError
from .graph import WeightedGraph, betti_number, parse_graph
from .invariants import DEFAULT_TOLERANCE, dumps, invariant_report, total_length
from .kernel import build_kernel
from .trees import DEFAULT_CAP, enumerate_spanning_trees
from .voronoi import DEFAULT_RADIUS, homology_basis, moment_by_theta_montecarlo, moment_by_trees

EXIT_OK, EXIT_INPUT, EXIT_CHECK, EXIT_CAP = 0, 2, 3, 4
DEFAULT_SAMPLES = 10**6
MC_SIGMAS = 3.0


@dataclass(frozen=True)
class RunConfig:
    input: str = "-"
    base_vertex: str | None = None
    tolerance: float = DEFAULT_TOLERANCE
    seed: int = 0
    samples: int = DEFAULT_SAMPLES
    cap: int = DEFAULT_CAP
    radius: int = DEFAULT_RADIUS
    format: str = "json"
    oracle: str = "none"

    def __post_init__(self):
        if not (self.tolerance > 0 and math.isfinite(self.tolerance)):
            raise ValueError("tolerance must be positive")
        if self.samples < 1:
            raise ValueError("samples must be at least 1")
        if self.cap < 1:
            raise ValueError("cap must be at least 1")
        if self.radius < 1:
            raise ValueError("radius must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")


def _read_graph(path: str, stdin: TextIO) -> WeightedGraph:
    if path == "-":
        return parse_graph(stdin.read())
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValueError(f"{path}: {exc.strerror or exc}") from None
    return parse_graph(text)


def _oracles(g: WeightedGraph, cfg: RunConfig, q: str, moment: float) -> tuple[dict[str, Any], bool]:
    out: dict[str, Any] = {}
    ok = True
    if cfg.oracle in ("trees", "all"):
        ens = enumerate_spanning_trees(g, cfg.cap)
        value = moment_by_trees(g, build_kernel(g, q), ens, q)
        delta = value - moment
        passed = abs(delta) <= cfg.tolerance * max(abs(moment), 1e-12)
        out["trees"] = {"value": value, "delta": delta, "count": len(ens), "ok": passed}
        ok &= passed
    if cfg.oracle in ("montecarlo", "all"):
        if betti_number(g) < 1:
            out["montecarlo"] = {"estimate": 0.0, "stderr": 0.0, "samples": 0, "seed": cfg.seed, "delta": 0.0, "ok": True}
        else:
            est = moment_by_theta_montecarlo(homology_basis(g), cfg.samples, cfg.seed, cfg.radius)
            delta = est.estimate - moment
            passed = abs(delta) <= MC_SIGMAS * est.stderr + cfg.tolerance * abs(moment)
            out["montecarlo"] = {
                "estimate": est.estimate,
                "stderr": est.stderr,
                "samples": cfg.samples,
                "seed": cfg.seed,
                "delta": delta,
                "ok": passed,
            }
            ok &= passed
    return out, ok


def _info(g: WeightedGraph, cfg: RunConfig) -> tuple[dict[str, Any], bool]:
    k = build_kernel(g, cfg.base_vertex)
    edges = [
        {
            "edge": e,
            "tail": t,
            "head": h,
            "length": w,
            "resistance": float(k.edge_resistances[e]),
            "foster": float(k.foster[e]),
        }
        for e, (t, h, w) in enumerate(g.edges)
    ]
    payload = {
        "graph": {"n": g.n, "m": g.m, "genus": betti_number(g), "total_length": total_length(g)},
        "base_vertex": k.q,
        "edges": edges,
    }
    return payload, True


def _moment(g: WeightedGraph, cfg: RunConfig) -> tuple[dict[str, Any], bool]:
    rep = invariant_report(g, cfg.base_vertex, cfg.tolerance)
    rep.oracles, ok = _oracles(g, cfg, rep.base_vertex, rep.moment)
    payload = rep.to_dict()
    payload["tolerances"]["seed"] = cfg.seed
    return payload, ok


def _tau(g: WeightedGraph, cfg: RunConfig) -> tuple[dict[str, Any], bool]:
    rep = invariant_report(g, cfg.base_vertex, cfg.tolerance)
    d = rep.to_dict()
    return {
        "graph": d["graph"],
        "base_vertex": rep.base_vertex,
        "tau": rep.tau,
        "edges": rep.edges,
        "tolerances": {"relative": cfg.tolerance},
    }, True


def _identity(g: WeightedGraph, cfg: RunConfig) -> tuple[dict[str, Any], bool]:
    rep = invariant_report(g, cfg.base_vertex, cfg.tolerance)
    lhs = None if rep.tau is None else rep.tau / 2.0 + rep.moment
    payload = {
        "graph": rep.to_dict()["graph"],
        "base_vertex": rep.base_vertex,
        "moment": rep.moment,
        "tau": rep.tau,
        "lhs": lhs,
        "rhs": rep.total_length / 8.0,
        "identity_residual": rep.identity_residual,
        "ok": rep.identity_ok,
        "tolerances": {"relative": cfg.tolerance},
    }
    return payload, rep.identity_ok


_COMMANDS = {"info": _info, "moment": _moment, "tau": _tau, "identity": _identity}


def _table(payload: dict[str, Any]) -> str:
    lines = []
    for key, val in payload.items():
        if key == "edges":
            continue
        if isinstance(val, dict):
            for k2, v2 in val.items():
                lines.append(f"{key}.{k2:<14} {_cell(v2)}")
        else:
            lines.append(f"{key:<22} {_cell(val)}")
    edges = payload.get("edges") or []
    if edges:
        cols = list(edges[0])
        lines.append("")
        lines.append("  ".join(f"{c:>12}" for c in cols))
        for row in edges:
            lines.append("  ".join(f"{_cell(row[c]):>12}" for c in cols))
    return "\n".join(lines)


def _cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    if isinstance(v, dict):
        return dumps(v)
    return str(v)


def _emit(payload, cfg: RunConfig, out: TextIO):
    out.write((dumps(payload) if cfg.format == "json" else _table(payload)) + "\n")


def run_one(command: str, g: WeightedGraph, cfg: RunConfig) -> tuple[dict[str, Any], bool]:
    return _COMMANDS[command](g, cfg)


def _batch(directory: str, cfg: RunConfig, out: TextIO, err: TextIO) -> int:
    root = Path(directory)
    if not root.is_dir():
        err.write(f"error: {directory} is not a directory\n")
        return EXIT_INPUT
    any_error = any_fail = False
    for path in sorted(p for p in root.iterdir() if p.is_file()):
        line: dict[str, Any] = {"file": path.name}
        try:
            g = _read_graph(str(path), sys.stdin)
            payload, ok = _moment(g, cfg)
            line.update({"status": "ok" if ok and _identity_ok(payload, cfg) else "check_failed"})
            line["report"] = payload
            any_fail |= line["status"] != "ok"
        except EnumerationCapError as exc:
            line.update({"status": "cap", "error": str(exc), "estimate": exc.estimate})
            any_error = True
        except (TropMomentError, ValueError, ArithmeticError, RuntimeError) as exc:
            line.update({"status": "error", "error": f"{type(exc).__name__}: {exc}"})
            any_error = True
        out.write(dumps(line) + "\n")
    if any_fail:
        return EXIT_CHECK
    return EXIT_INPUT if any_error else EXIT_OK


def _identity_ok(payload: dict[str, Any], cfg: RunConfig) -> bool:
    res = payload["identity_residual"]
    if res is None:
        return True
    return abs(res) < cfg.tolerance * max(1.0, payload["graph"]["total_length"] / 8.0)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--base-vertex", default=None, help="base vertex q (default: first vertex)")
    common.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)
    common.add_argument("--seed", type=int, default=0, help="Monte-Carlo seed (64-bit)")
    common.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    common.add_argument("--cap", type=int, default=DEFAULT_CAP, help="spanning-tree enumeration cap")
    common.add_argument("--radius", type=int, default=DEFAULT_RADIUS, help="lattice search radius K")
    common.add_argument("--oracle", choices=["none", "trees", "montecarlo", "all"], default="none")
    common.add_argument("--format", choices=["json", "table"], default="json")

    p = argparse.ArgumentParser(prog="tropmoment", description="Invariants of metric graphs.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in [
        ("info", "graph digest and per-edge Foster table"),
        ("moment", "tropical moment, optionally with oracles"),
        ("tau", "tau invariant"),
        ("identity", "check tau/2 + I = total length / 8"),
    ]:
        sp = sub.add_parser(name, parents=[common], help=text)
        sp.add_argument("--input", default="-", help="edge-list file, '-' for stdin")
    sp = sub.add_parser("batch", parents=[common], help="moment report for every file in a directory")
    sp.add_argument("directory")
    return p


def main(argv: list[str] | None = None, stdin: TextIO | None = None, stdout: TextIO | None = None,
         stderr: TextIO | None = None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        cfg = RunConfig(
            input=getattr(args, "input", "-"),
            base_vertex=args.base_vertex,
            tolerance=args.tolerance,
            seed=args.seed,
            samples=args.samples,
            cap=args.cap,
            radius=args.radius,
            format=args.format,
            oracle=args.oracle,
        )
    except ValueError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_INPUT

    start = time.perf_counter()
    try:
        if args.command == "batch":
            code = _batch(args.directory, cfg, stdout, stderr)
        else:
            g = _read_graph(cfg.input, stdin)
            payload, ok = run_one(args.command, g, cfg)
            _emit(payload, cfg, stdout)
            code = EXIT_OK if ok else EXIT_CHECK
    except EnumerationCapError as exc:
        stderr.write(f"error: {exc}\n")
        stderr.write(f"spanning trees: {exc.estimate:.0f}\n")
        code = EXIT_CAP
    except IndexError as exc:
        # unknown base vertex
        stderr.write(f"error: {exc}\n")
        code = EXIT_INPUT
    except (TropMomentError, ValueError, ArithmeticError, RuntimeError) as exc:
        stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        code = EXIT_INPUT
    stderr.write(f"wall time: {time.perf_counter() - start:.3f} s\n")
    return code


def main_entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    main_entry()
