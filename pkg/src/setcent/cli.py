"""Command-line interface.

Exit codes: 0 success, 1 I/O or input-file error, 2 invalid arguments,
3 sample budget exhausted before the guarantee was certified.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

from . import __version__, datasets, engine, oracle
from .bounds import BoundReport
from .graph import GraphParseError, graph_stats
from .sampler import OracleLimitError, Sample

EXIT_OK, EXIT_IO, EXIT_ARGS, EXIT_BUDGET = 0, 1, 2, 3
SCHEMA_VERSION = 1

log = logging.getLogger("setcent")


class ArgError(Exception):
    pass


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {s}")
    return v


def _add_graph_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph", required=True,
                   help="edge-list path (.gz/.bz2 ok), bundled:NAME, or a fetched dataset name")
    p.add_argument("--directed", action="store_true", help="treat edges as directed")


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--t", type=int, default=100, help="Monte Carlo trials (default 100)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=1.2, help="geometric growth factor")
    p.add_argument("--m-max", type=int, default=None, help="sample budget")
    p.add_argument("--b", type=int, default=None, help="upper bound on the vertex diameter")
    p.add_argument("--c-star", type=float, default=None,
                   help="lower bound on the optimal centrality; with --b sets the VC sample budget")
    p.add_argument("--c-const", type=float, default=0.5, help="VC sample-complexity constant")
    p.add_argument("--threads", type=int, default=1, help="sampling worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="setcent", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fetch", help="download and cache the manifest graphs")
    p.add_argument("--manifest", default=None, help="manifest file (default: bundled list)")
    p.add_argument("--only", nargs="*", default=None, help="restrict to these names")
    p.add_argument("--force", action="store_true", help="re-download cached graphs")
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("stats", help="print n, |E| and the vertex diameter B")
    _add_graph_args(p)
    p.add_argument("--b", type=int, default=None, help="skip the exact computation, report this B")
    p.add_argument("--no-diameter", action="store_true", help="do not compute B")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("maximize", help="approximate the most central k-set")
    _add_graph_args(p)
    _add_run_args(p)
    p.add_argument("--variant", choices=["centra", "centra-vc", "hedge-p"], default="centra")
    p.add_argument("--out", default=None, help="JSON report path")
    p.add_argument("--trace", default=None, help="CSV trace path (default: --out with .csv)")
    p.set_defaults(func=cmd_maximize)

    p = sub.add_parser("bound", help="compare SD bounds on one shared fixed-size sample")
    _add_graph_args(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=_positive_int, nargs="+", required=True)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--t", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--b", type=int, default=None, help="vertex diameter bound for the VC bound")
    p.add_argument("--exact-b", action="store_true", help="compute B exactly when --b is absent")
    p.add_argument("--c-const", type=float, default=0.5)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None, help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("compare", help="samples and time to stop, per variant and eps")
    _add_graph_args(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eps", type=float, nargs="+", default=[0.2, 0.1, 0.05])
    p.add_argument("--variants", nargs="+", default=["centra", "hedge-p"],
                   choices=["centra", "centra-vc", "hedge-p"])
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--t", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--m-max", type=int, default=None)
    p.add_argument("--b", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None, help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("oracle", help="brute-force ground truth (tiny graphs only)")
    _add_graph_args(p)
    p.add_argument("what", choices=["optimum", "sd"])
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int, default=1000, help="sample size for 'sd'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ceiling", type=int, default=oracle.DEFAULT_CEILING)
    p.add_argument("--yes-this-is-slow", action="store_true", dest="confirmed")
    p.set_defaults(func=cmd_oracle)
    return parser


def _echo(args: argparse.Namespace) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


def _write_csv(rows: list[dict], columns, path: str | None) -> None:
    fh = open(path, "w", newline="", encoding="utf-8") if path else sys.stdout
    try:
        writer = csv.DictWriter(fh, fieldnames=list(columns), extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({c: ("" if row.get(c) is None else row.get(c)) for c in columns})
    finally:
        if path:
            fh.close()


def _load(args):
    return datasets.load_graph(args.graph, directed=args.directed)


def cmd_fetch(args) -> int:
    text = Path(args.manifest).read_text(encoding="utf-8") if args.manifest else datasets.default_manifest()
    entries = datasets.parse_manifest(text)
    if args.only:
        entries = [e for e in entries if e.name in set(args.only)]
    for path in datasets.fetch(entries, force=args.force):
        print(path)
    return EXIT_OK


def cmd_stats(args) -> int:
    g = _load(args)
    st = graph_stats(g, vertex_diameter=args.b, exact=not args.no_diameter)
    if args.json:
        print(json.dumps({"graph": args.graph, "n": st.n, "edge_count": st.edge_count,
                          "vertex_diameter": st.vertex_diameter}))
    else:
        b = "unknown" if st.vertex_diameter is None else st.vertex_diameter
        print(f"n={st.n} edges={st.edge_count} B={b}")
    return EXIT_OK


def cmd_maximize(args) -> int:
    try:
        cfg = engine.RunConfig(k=args.k, eps=args.eps, delta=args.delta, t=args.t,
                               variant=args.variant, seed=args.seed, alpha=args.alpha,
                               m_max=args.m_max, b=args.b, c_star_lower=args.c_star,
                               c_const=args.c_const, workers=args.threads)
    except ValueError as e:
        raise ArgError(str(e)) from None
    g = _load(args)
    t0 = time.perf_counter()
    res = engine.run(g, cfg)
    seconds = time.perf_counter() - t0
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "maximize",
        "arguments": _echo(args),
        "graph": {"n": g.n, "edge_count": g.edge_count, "directed": g.directed},
        "nodes_external": [g.label_of(u) for u in res.nodes],
        "seconds": seconds,
        "result": res.to_dict(),
    }
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2), encoding="utf-8")
        trace = args.trace or str(Path(args.out).with_suffix(".csv"))
    else:
        trace = args.trace
    if trace:
        _write_csv(engine.trace_rows(res), engine.TRACE_COLUMNS, trace)
    final = res.trace[-1]
    print(f"variant={res.variant} m={res.total_samples} eta={final.sd_bound:.6g} "
          f"c_hat={res.c_hat:.6g} seconds={seconds:.3f}"
          + ("" if res.certified else " BUDGET-EXHAUSTED (guarantee not certified)"))
    return EXIT_OK if res.certified else EXIT_BUDGET


BOUND_COLUMNS = ("method", "k", "m", "t", "delta", "sd_bound", "c_hat", "nu", "xi",
                 "amcera", "wimpy", "r_tilde", "r_cap", "eta", "eta_ub", "eps_vc", "d1", "dk")


def bound_rows(report: BoundReport) -> list[dict]:
    base = report.to_dict()
    rows = [dict(base, method="centra", sd_bound=report.eta),
            dict(base, method="hedge", sd_bound=report.eta_ub)]
    if report.eps_vc is not None:
        rows.append(dict(base, method="vc", sd_bound=report.eps_vc))
    return rows


def cmd_bound(args) -> int:
    if args.m < 1 or args.t < 1 or not 0 < args.delta < 1:
        raise ArgError("need m >= 1, t >= 1 and delta in (0, 1)")
    g = _load(args)
    b = args.b
    if b is None and args.exact_b:
        b = graph_stats(g).vertex_diameter
    sample, state = engine.draw_sample(g, args.m, args.t, args.seed, args.threads)
    rows = []
    for k in args.k:
        dk = engine._vc_dims(b, k) if b is not None else None
        rep, _ = engine.evaluate_bounds(sample, state, g.n, k, args.delta, dk, args.c_const)
        rep.check()
        rows.extend(bound_rows(rep))
    _write_csv(rows, BOUND_COLUMNS, args.out)
    return EXIT_OK


COMPARE_COLUMNS = ("variant", "eps", "k", "repeat", "seed", "m_final", "iterations",
                   "seconds", "c_hat", "sd_bound", "certified")


def cmd_compare(args) -> int:
    g = _load(args)
    rows = []
    for eps in args.eps:
        for rep in range(args.repeats):
            seed = args.seed + rep
            for variant in args.variants:
                try:
                    cfg = engine.RunConfig(k=args.k, eps=eps, delta=args.delta, t=args.t,
                                           variant=variant, seed=seed, m_max=args.m_max,
                                           b=args.b, workers=args.threads)
                except ValueError as e:
                    raise ArgError(str(e)) from None
                t0 = time.perf_counter()
                res = engine.run(g, cfg)
                rows.append({"variant": variant, "eps": eps, "k": args.k, "repeat": rep,
                             "seed": seed, "m_final": res.total_samples,
                             "iterations": len(res.trace),
                             "seconds": round(time.perf_counter() - t0, 6), "c_hat": res.c_hat,
                             "sd_bound": res.trace[-1].sd_bound, "certified": int(res.certified)})
    _write_csv(rows, COMPARE_COLUMNS, args.out)
    return EXIT_OK


def cmd_oracle(args) -> int:
    if not args.confirmed:
        raise ArgError("oracle commands enumerate subsets exhaustively; pass --yes-this-is-slow")
    g = _load(args)
    if args.what == "optimum":
        opt = oracle.brute_force_optimum(g, args.k, ceiling=args.ceiling)
        out = {"S_star": [g.label_of(u) for u in opt.S_star], "value": float(opt.value),
               "value_exact": str(opt.value), "evaluated_subsets": opt.evaluated_subsets}
    else:
        sample, _ = engine.draw_sample(g, args.m, 1, args.seed)
        out = {"m": args.m, "k": args.k, "sd": oracle.exact_supremum_deviation(
            g, sample, args.k, ceiling=args.ceiling)}
    print(json.dumps(out))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ArgError, OracleLimitError) as e:
        print(f"setcent: error: {e}", file=sys.stderr)
        return EXIT_ARGS
    except (OSError, GraphParseError) as e:
        print(f"setcent: I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
