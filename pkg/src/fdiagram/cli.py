"""Command-line interface.

Exit codes: 0 pass, 1 fail, 2 error (bad input, schema or domain errors).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import io as fio
from . import subsets as ss
from .core import (
    Backend,
    PreconditionError,
    Tolerance,
    VerificationError,
    build_diagram,
    conditioned_interaction,
    is_independent,
    test_fcmi,
)
from .graphs import candidate_smallest_graph, markov_chain_violations, test_mrf_diagram
from .prob import BACKENDS, entropy_value, kl_value, marginal, second_law_system

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


@dataclass(frozen=True)
class RunConfig:
    command: str
    inputs: tuple
    base: object = 2
    tol: float | None = None
    fmt: str = "table"
    verify: bool = False
    jobs: int = 1

    def __post_init__(self):
        if self.tol is not None and not self.tol > 0:
            raise ValueError("--tol must be positive")
        if self.jobs < 1:
            raise ValueError("--jobs must be at least 1")

    @property
    def tolerance(self) -> Tolerance | None:
        return None if self.tol is None else Tolerance(self.tol, self.tol)


def _config(args) -> RunConfig:
    base = math.e if args.base == "e" else 2
    inputs = tuple(v for k, v in sorted(vars(args).items()) if k in ("file", "graph"))
    return RunConfig(args.command, inputs, base, args.tol, args.format, args.verify, args.jobs)


def _backend(path, functional: str, cfg: RunConfig) -> Backend:
    if functional == "abstract":
        backend, _, _ = fio.load_model(path)
        return backend
    system = fio.load_system(path)
    return BACKENDS[functional](system, base=cfg.base, tol=cfg.tolerance)


def _fmt_value(v) -> str:
    if isinstance(v, float):
        s = f"{v:.6f}"
        return "0.000000" if s == "-0.000000" else s
    return str(v[0]) if len(v) == 1 else "(" + ",".join(map(str, v)) + ")"


def _table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(headers)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    out = [fmt.format(*headers), fmt.format(*("-" * w for w in widths))]
    out += [fmt.format(*r) for r in rows]
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# commands


def cmd_diagram(args, cfg: RunConfig, out) -> int:
    backend = _backend(args.file, args.functional, cfg)
    diagram = build_diagram(backend, jobs=cfg.jobs)
    total = diagram.total()
    if cfg.verify:
        whole = backend.degree1(0, ss.full(backend.n))
        if not diagram.is_zero_value(backend.group.sub(total, whole)):
            raise VerificationError(f"atoms sum to {total}, F(X_[n]) = {whole}")
    if cfg.fmt == "json":
        out.write(fio.diagram_to_json(diagram, args.functional))
    elif cfg.fmt == "csv":
        out.write(fio.diagram_to_csv(diagram))
    elif cfg.fmt == "table":
        rows = [
            [ss.atom_label(I), ss.format_set(I), _fmt_value(v), "yes" if diagram.is_zero_atom(I) else "no"]
            for I, v in diagram.items()
        ]
        rows.append(["total", ss.format_set(ss.full(diagram.n)), _fmt_value(total), ""])
        out.write(_table(["atom", "set", "value", "zero"], rows))
    else:
        raise ValueError(f"format {cfg.fmt!r} not available for diagrams")
    return EXIT_PASS


def _report(cfg: RunConfig, out, name: str, passed: bool, violating: list[int], extra=None) -> int:
    extra = extra or {}
    if cfg.fmt == "json":
        doc = {"test": name, "pass": passed, "violating": [ss.format_set(W) for W in violating]}
        doc.update(extra)
        out.write(json.dumps(doc, indent=2) + "\n")
    elif cfg.fmt == "csv":
        out.write("test,pass,violating\n")
        out.write(f"{name},{int(passed)},{' '.join(ss.format_set(W) for W in violating)}\n")
    else:
        out.write(f"{name}: {'PASS' if passed else 'FAIL'}\n")
        for k, v in extra.items():
            out.write(f"  {k}: {v}\n")
        if violating:
            out.write("  violating atoms: " + " ".join(ss.atom_label(W) for W in violating) + "\n")
    return EXIT_PASS if passed else EXIT_FAIL


def cmd_test(args, cfg: RunConfig, out) -> int:
    backend = _backend(args.file, args.functional, cfg)
    n = backend.n
    if args.test == "indep":
        A, B, C = (ss.parse_set(x) for x in (args.A, args.B, args.C))
        for X in (A, B, C):
            ss.check_within(X, n)
        value = conditioned_interaction(backend, C, [A, B])
        ok = is_independent(backend, A, B, C)
        return _report(cfg, out, "indep", ok, [], {"value": fio.group_value_to_json(value)
                                                   if not isinstance(value, float) else value})
    if args.test == "fcmi":
        K = fio.parse_partition(args.K, n)
        ok, bad = test_fcmi(backend, K, verify=cfg.verify)
        return _report(cfg, out, "fcmi", ok, bad)
    diagram = build_diagram(backend, jobs=cfg.jobs)
    if args.test == "mrf":
        G = fio.load_graph(args.graph)
        ok, bad = test_mrf_diagram(diagram, G)
        return _report(cfg, out, "mrf", ok, bad)
    if args.test == "chain":
        bad = markov_chain_violations(diagram)
        return _report(cfg, out, "chain", not bad, bad)
    raise ValueError(f"unknown test {args.test!r}")


def cmd_infer_graph(args, cfg: RunConfig, out) -> int:
    backend = _backend(args.file, args.functional, cfg)
    cand = candidate_smallest_graph(build_diagram(backend, jobs=cfg.jobs))
    G = cand.graph
    if cand.warning:
        print(f"warning: {cand.warning}", file=sys.stderr)
    if cfg.fmt == "dot":
        out.write(fio.graph_to_dot(G))
    elif cfg.fmt == "json":
        doc = fio.graph_to_dict(G)
        doc.update({"mrf_verified": cand.mrf_verified, "warning": cand.warning})
        out.write(json.dumps(doc, indent=2) + "\n")
    elif cfg.fmt == "csv":
        out.write("i,j\n" + "".join(f"{i},{j}\n" for i, j in G.sorted_edges()))
    else:
        out.write(f"candidate graph on {G.n} vertices, {len(G.edges)} edges\n")
        for i, j in G.sorted_edges():
            out.write(f"  {i} -- {j}\n")
        out.write(f"  MRF on candidate: {'yes' if cand.mrf_verified else 'no'}\n")
    return EXIT_PASS


def cmd_second_law(args, cfg: RunConfig, out) -> int:
    try:
        sizes, P1, Q1, Ts = fio.second_law_config(fio.read_json(args.file), str(args.file))
        system = second_law_system(sizes, P1, Q1, Ts)
    except (IndexError, TypeError) as e:
        raise fio.SchemaError(f"{args.file}: malformed config ({e})") from None
    n = system.n
    kl = [kl_value(system, 0, 1 << i, cfg.base) for i in range(n)]
    ent = [entropy_value(system, 0, 1 << i, cfg.base) for i in range(n)]
    backend = BACKENDS["kl"](system, base=cfg.base, tol=cfg.tolerance)
    diagram = build_diagram(backend, jobs=cfg.jobs)
    eps = (cfg.tol or 1e-9)
    kl_ok = all(b <= a + eps for a, b in zip(kl, kl[1:]))
    ent_ok = all(b >= a - eps for a, b in zip(ent, ent[1:]))
    # entropy growth is only predicted when every reference marginal is uniform
    uniform = all(
        np.allclose(list(marginal(system, 1, 1 << i).table.values()), 1.0 / sizes[i]) for i in range(n)
    )
    late = [I for I in diagram.atoms if I & 1 == 0]
    late_bad = diagram.restrict_zero(late)
    passed = kl_ok and not late_bad and (ent_ok or not uniform)
    if cfg.fmt == "json":
        doc = {
            "kl": kl,
            "entropy": ent,
            "kl_nonincreasing": kl_ok,
            "entropy_nondecreasing": ent_ok,
            "entropy_prediction_applies": bool(uniform),
            "late_atoms_vanish": not late_bad,
            "atoms": fio.diagram_rows(diagram),
        }
        out.write(json.dumps(doc, indent=2) + "\n")
    elif cfg.fmt == "csv":
        out.write("i,kl,entropy\n")
        out.write("".join(f"{i + 1},{kl[i]!r},{ent[i]!r}\n" for i in range(n)))
    else:
        rows = [[str(i + 1), f"{kl[i]:.6f}", f"{ent[i]:.6f}"] for i in range(n)]
        out.write(_table(["i", "KL(X_i)", "H(X_i)"], rows))
        out.write(f"KL non-increasing: {'yes' if kl_ok else 'no'}\n")
        out.write(f"entropy non-decreasing: {'yes' if ent_ok else 'no'}"
                  f"{'' if uniform else ' (not predicted: reference is not uniform)'}\n")
        out.write(f"atoms with min(I) >= 2 vanish: {'yes' if not late_bad else 'no'}\n\n")
        rows = [
            [ss.atom_label(I), _fmt_value(v), "yes" if diagram.is_zero_atom(I) else "no"]
            for I, v in diagram.items()
        ]
        out.write(_table(["atom", "value", "zero"], rows))
    return EXIT_PASS if passed else EXIT_FAIL


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--base", choices=["2", "e"], default="2", help="logarithm base")
    common.add_argument("--tol", type=float, default=None, help="absolute and relative zero tolerance")
    common.add_argument("--format", choices=["table", "csv", "json", "dot"], default="table")
    common.add_argument("--verify", action="store_true", help="cross-check equivalent criteria")
    common.add_argument("--jobs", type=int, default=1, help="threads for atom evaluation")

    functional = argparse.ArgumentParser(add_help=False)
    functional.add_argument("file", help="system (entropy/kl/ce) or model (abstract) JSON file")
    functional.add_argument("--functional", "-f", choices=["entropy", "kl", "ce", "abstract"],
                            default="entropy")

    p = argparse.ArgumentParser(prog="fdiagram", description="Information diagrams for chain-rule functions.")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("diagram", parents=[functional, common], help="print all atom values")

    t = sub.add_parser("test", help="independence, FCMI, MRF and Markov chain tests")
    tsub = t.add_subparsers(dest="test", required=True)
    ti = tsub.add_parser("indep", parents=[functional, common], help="A independent of B given C")
    ti.add_argument("A")
    ti.add_argument("B")
    ti.add_argument("C", nargs="?", default="")
    tf = tsub.add_parser("fcmi", parents=[functional, common], help="conditional partition 'J|L1|L2|...'")
    tf.add_argument("K")
    tm = tsub.add_parser("mrf", parents=[functional, common], help="Markov random field on a graph")
    tm.add_argument("graph")
    tsub.add_parser("chain", parents=[functional, common], help="Markov chain X1 - X2 - ... - Xn")

    sub.add_parser("infer-graph", parents=[functional, common], help="candidate smallest MRF graph")

    s = sub.add_parser("second-law", parents=[common], help="KL and entropy along shared-transition chains")
    s.add_argument("file")
    return p


COMMANDS = {
    "diagram": cmd_diagram,
    "test": cmd_test,
    "infer-graph": cmd_infer_graph,
    "second-law": cmd_second_law,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        return COMMANDS[args.command](args, cfg, out)
    except (ValueError, OSError, PreconditionError, VerificationError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
