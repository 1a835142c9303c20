"""Command-line front end.

Exit status: 0 success, 1 a verification found a violation, 2 usage error,
3 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from cyclerank import graph_core as gc
from cyclerank import graphing_model as gm
from cyclerank import minorize as mz
from cyclerank import partition_lab as pl
from cyclerank import rank_estimator as re_
from cyclerank.local_access import FAMILY_HELP, SIZED_FAMILIES, parse_family
from cyclerank.reports import PreconditionError, ViolationReport, jsonable, rational_str

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
FORMATS = ("json", "csv", "text")


class UsageError(Exception):
    pass


def _cell(v) -> str:
    if v is None:
        return ""
    return v if isinstance(v, str) else json.dumps(v)


def render(obj, fmt: str = "json") -> str:
    """Serialize a dict (one record) or a list of dicts (a table)."""
    data = jsonable(obj)
    if fmt == "json":
        return json.dumps(data) + "\n"
    rows = data if isinstance(data, list) else [data]
    keys = list(rows[0]) if rows else []
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(keys)
        for row in rows:
            w.writerow([_cell(row[k]) for k in keys])
        return buf.getvalue()
    if isinstance(data, dict):
        width = max((len(k) for k in keys), default=0)
        return "".join(f"{k:<{width}}  {_cell(v)}\n" for k, v in data.items())
    table = [keys] + [[_cell(row[k]) for k in keys] for row in rows]
    widths = [max(len(r[i]) for r in table) for i in range(len(keys))]
    return "".join("  ".join(c.rjust(w) for c, w in zip(r, widths)).rstrip() + "\n"
                   for r in table)


def _emit(obj, args) -> None:
    sys.stdout.write(render(obj, args.format or "json"))


def cmd_rank(args) -> int:
    g = gc.read_edge_list(args.input)
    x = gc.read_edge_set(g, args.subset) if args.subset else g.all_edges()
    part = gc.components(g, x)
    _emit({
        "rho": rational_str(gc.normalized_rank(g, x)),
        "rank": gc.rank(g, x),
        "components": part.class_count,
        "nodes": g.node_count,
        "edges": len(x),
    }, args)
    return EXIT_OK


def cmd_estimate(args) -> int:
    o = parse_family(args.family)
    p = re_.plan(args.epsilon, args.mode)
    est = re_.estimate_total_rank(o, p, args.seed, workers=args.workers)
    _emit(est.to_dict(), args)
    return EXIT_OK


def _parse_sizes(text: str) -> list[int]:
    try:
        sizes = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"bad --sizes {text!r}") from None
    if not sizes:
        raise UsageError("--sizes is empty")
    return sizes


def cmd_converge(args) -> int:
    if args.family not in SIZED_FAMILIES:
        raise UsageError(f"converge needs one of {SIZED_FAMILIES}")
    p = re_.plan(args.epsilon, args.mode)
    rows = re_.convergence_table(args.family, _parse_sizes(args.sizes), p, args.seed)
    if args.format in (None, "csv"):
        sys.stdout.write(re_.table_csv(rows))
    else:
        _emit([r.to_dict() for r in rows], args)
    return EXIT_OK


def _check_submodular(args, rng) -> ViolationReport:
    report = ViolationReport(name="submodular")
    for _ in range(args.trials):
        g = gc.random_graph(args.nodes or 5, 0.5, rng)
        sub = gc.check_submodular_exhaustive(g, exhaustive_limit=args.exhaustive_limit, rng=rng)
        report.mode = sub.mode
        report.merge(sub)
    return report


def _check_supermod(args, rng) -> ViolationReport:
    report = ViolationReport(name="supermodular", mode="randomized")
    for _ in range(args.trials):
        n = int(rng.integers(1, (args.nodes or 12) + 1))
        p, q, r = pl.random_triple(n, rng)
        res = pl.check_supermodular_triple(p, q, r)
        report.checked += 1
        if res.preconditions:
            report.preconditions.append(res.preconditions)
        elif res.violated or pl.weighted_defect(p, q, r) != res.slack:
            report.violations.append({"p": p.to_dict(), "q": q.to_dict(), "r": r.to_dict(),
                                      **res.to_dict()})
    return report


def _check_sandwich(args, rng) -> ViolationReport:
    report = ViolationReport(name="rho_eta_sandwich", mode="randomized")
    for _ in range(args.trials):
        wg = gm.random_weighted_graphing(int(rng.integers(1, (args.nodes or 8) + 1)), rng)
        report.merge(gm.check_rho_eta_sandwich(wg, gc.random_edge_set(wg.graph, rng)))
    return report


def _check_rerand(args, rng) -> ViolationReport:
    report = ViolationReport(name="rerandomizing", mode="randomized")
    for _ in range(args.trials):
        space = pl.random_level_space(int(rng.integers(1, (args.nodes or 10) + 1)), rng)
        p = pl.random_rerandomizing_partition(space, rng)
        q = pl.random_rerandomizing_partition(space, rng)
        report.checked += 1
        for label, part in (("split", pl.split_finite_classes(p, rng)), ("join", pl.join(p, q))):
            if not pl.has_rerandomizing_property(part):
                report.violations.append({"case": label, "partition": part.to_dict()})
    return report


CHECKS = {
    "submodular": _check_submodular,
    "supermod": _check_supermod,
    "sandwich": _check_sandwich,
    "rerand": _check_rerand,
}


def cmd_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    report = CHECKS[args.what](args, rng)
    out = report.to_dict()
    out["seed"] = args.seed
    _emit(out, args)
    return EXIT_OK if report.ok else EXIT_VIOLATION


def cmd_minorize(args) -> int:
    g = gc.read_edge_list(args.input)
    if args.forest:
        a = mz.forest_minorizer(g, gc.spanning_forest(g))
        order = None
    else:
        if args.order == "random":
            order = [int(i) for i in np.random.default_rng(args.seed).permutation(g.edge_count)]
        else:
            order = list(range(g.edge_count))
        a = mz.greedy_minorizer(g, order)
    report = mz.verify_minorizing(g, a, exhaustive_limit=args.exhaustive_limit,
                                  rng=np.random.default_rng(args.seed))
    out = {"measure": [rational_str(w) for w in a.weights], "order": order,
           "total": rational_str(a.total),
           "rho_E": rational_str(gc.normalized_rank(g, g.all_edges()))}
    out.update(report.to_dict())
    _emit(out, args)
    return EXIT_OK if report.ok and report.base else EXIT_VIOLATION


def cmd_experiment(args) -> int:
    p = re_.plan(args.epsilon, args.mode)
    rep = re_.nonadditivity_experiment(args.degree, args.r, p, args.seed)
    out = rep.to_dict()
    out.update({"epsilon": re_.fmt_float(p.epsilon), "k": p.k, "N": p.N, "mode": p.mode,
                "seed": args.seed})
    _emit(out, args)
    return EXIT_OK if rep.holds else EXIT_VIOLATION


def _epsilon(text: str) -> float:
    eps = float(text)
    if not 0 < eps < 1:
        raise argparse.ArgumentTypeError("epsilon must lie in (0, 1)")
    return eps


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cyclerank", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default=None,
                        help="output format (default: csv for converge, json otherwise)")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("rank", parents=[common], help="exact rank of an edge list")
    s.add_argument("--input", required=True, help="edge-list file")
    s.add_argument("--subset", help="file of edge indices (default: all edges)")
    s.set_defaults(func=cmd_rank)

    def estimator_args(s, default_eps=0.1):
        s.add_argument("--epsilon", type=_epsilon, default=default_eps)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--mode", choices=re_.MODES, default="cap")

    s = sub.add_parser("estimate", parents=[common], help="sample-based total rank estimate")
    s.add_argument("--family", required=True, help=FAMILY_HELP)
    estimator_args(s)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("converge", parents=[common], help="exact and estimated rank along a family")
    s.add_argument("--family", required=True, help=" | ".join(SIZED_FAMILIES))
    s.add_argument("--sizes", required=True, help="comma-separated sizes")
    estimator_args(s)
    s.set_defaults(func=cmd_converge)

    s = sub.add_parser("check", parents=[common], help="randomized / exhaustive property checks")
    s.add_argument("what", choices=sorted(CHECKS))
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--nodes", type=int, default=None)
    s.add_argument("--exhaustive-limit", type=int, default=gc.DEFAULT_EXHAUSTIVE_LIMIT)
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("minorize", parents=[common], help="minorizing measure with verification")
    s.add_argument("--input", required=True)
    s.add_argument("--order", choices=("random", "given"), default="given")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--forest", action="store_true", help="use the BFS spanning forest measure")
    s.add_argument("--exhaustive-limit", type=int, default=gc.DEFAULT_EXHAUSTIVE_LIMIT)
    s.set_defaults(func=cmd_minorize)

    s = sub.add_parser("experiment", parents=[common], help="named experiments")
    s.add_argument("name", choices=("nonadd",))
    s.add_argument("--degree", type=int, default=5)
    s.add_argument("--r", type=int, default=None)
    estimator_args(s)
    s.set_defaults(func=cmd_experiment)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UsageError, PreconditionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
