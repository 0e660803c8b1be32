"""Command-line front end: run, oracle, verify and bench."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

from . import daemon_engine as de
from . import mst_rules as mr
from . import nca_labeling as nl
from . import verification_oracles as vo
from .graph_core import Graph, GraphError, generate_graph, kruskal_mst, parse_graph
from .state_model import (Configuration, arbitrary_configuration, in_bits, label_bits,
                          load_configuration, singleton_configuration)

EXIT_OK, EXIT_USAGE, EXIT_DIVERGED = 0, 1, 2
WEIGHTS = (1, 100)


class UsageError(Exception):
    pass


@dataclass
class ExperimentConfig:
    graph: str
    seed: int = 0
    init: str = "singleton"
    daemon: str = "sync"
    max_rounds: int | None = None
    confirm: int | str | None = None
    trace: str | None = None
    format: str = "human"


def load_graph(graph_path: str | None, gen: str | None, seed: int) -> Graph:
    if graph_path:
        try:
            with open(graph_path) as fh:
                return parse_graph(fh.read())
        except OSError as exc:
            raise UsageError(f"cannot read {graph_path}: {exc.strerror}") from None
    parts = gen.split(":")
    if len(parts) not in (2, 3):
        raise UsageError(f"--gen expects MODEL:N[:P], got {gen!r}")
    try:
        n = int(parts[1])
        p = float(parts[2]) if len(parts) == 3 else 0.5
    except ValueError:
        raise UsageError(f"--gen expects MODEL:N[:P], got {gen!r}") from None
    return generate_graph(n, parts[0], WEIGHTS, seed, p)


def initial_configuration(g: Graph, init: str) -> Configuration:
    if init == "singleton":
        return singleton_configuration(g)
    if init.startswith("arbitrary:"):
        try:
            return arbitrary_configuration(g, int(init.split(":", 1)[1]))
        except ValueError:
            pass
    raise UsageError(f"--init expects singleton or arbitrary:SEED, got {init!r}")


def register_bits(c: Configuration) -> tuple[int, int]:
    return (max(label_bits(c[v].ell) for v in c), max(in_bits(c[v].in_sel) for v in c))


def simulate(g: Graph, c: Configuration, daemon: str, max_rounds: int | None,
             confirm: int | None, trace: str | None = None) -> dict:
    """One run plus the figures every report needs."""
    try:
        policy = de.make_policy(daemon, g.n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    bits = [0, 0]

    def on_round(_, cfg):
        lb, ib = register_bits(cfg)
        bits[0] = max(bits[0], lb)
        bits[1] = max(bits[1], ib)

    limit = max_rounds if max_rounds is not None else 50 * g.n * g.n + 100
    res = de.run(c, policy, limit, confirm, trace_path=trace, keep_trace=False, on_round=on_round)
    verdict = vo.check_mst(res.final)
    return {
        "stabilized": res.stabilized,
        "verdict": str(verdict),
        "rounds": res.rounds_elapsed,
        "converged_round": res.converged_round,
        "moves": res.moves,
        "tree_weight": verdict.weight,
        "oracle_weight": kruskal_mst(g)[1],
        "max_label_bits": bits[0],
        "max_in_bits": bits[1],
    }


def _emit(fmt: str, config: dict, report: dict, out=None):
    out = out or sys.stdout
    if fmt == "json":
        print(json.dumps({"config": config, "report": report}), file=out)
        return
    print("# " + " ".join(f"{k}={v}" for k, v in config.items()), file=out)
    if fmt == "csv":
        w = csv.DictWriter(out, fieldnames=list(report))
        w.writeheader()
        w.writerow(report)
    else:
        for k, v in report.items():
            print(f"{k:15} {v}", file=out)


def _graph_label(args) -> str:
    return args.graph if args.graph else f"gen:{args.gen}"


def cmd_run(args) -> int:
    g = load_graph(args.graph, args.gen, args.seed)
    c = initial_configuration(g, args.init)
    cfg = ExperimentConfig(_graph_label(args), args.seed, args.init, args.daemon,
                           args.max_rounds, args.confirm if args.confirm is not None else "auto",
                           args.trace, args.format)
    try:
        report = simulate(g, c, args.daemon, args.max_rounds, args.confirm, args.trace)
    except OSError as exc:
        raise UsageError(f"cannot write trace: {exc.strerror}") from None
    _emit(args.format, asdict(cfg), report)
    ok = report["stabilized"] and report["verdict"] == "LEGITIMATE"
    return EXIT_OK if ok else EXIT_DIVERGED


def cmd_oracle(args) -> int:
    g = load_graph(args.graph, args.gen, args.seed)
    edges, total = kruskal_mst(g)
    ordered = sorted(edges, key=lambda e: e.key)
    if args.format == "json":
        print(json.dumps({"weight": total, "edges": [[e.u, e.v, e.w] for e in ordered]}))
    else:
        print(f"weight {total}")
        for e in ordered:
            print(f"{e.u} {e.v} {e.w}")
    return EXIT_OK


def node_failures(c: Configuration, v: int) -> list[str]:
    bad = [] if mr.guard_distance(c, v) else ["Distance"]
    return bad + nl.predicates(c, v).failing()


def cmd_verify(args) -> int:
    g = load_graph(args.graph, args.gen, args.seed)
    try:
        with open(args.state) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {args.state}: {exc.strerror}") from None
    try:
        c = load_configuration(g, text)
    except ValueError as exc:
        raise UsageError(f"{args.state}: {exc}") from None
    verdict = vo.check_mst(c)
    try:
        ph, lam = vo.phi(c), vo.lambda_(c)
    except vo.CycleError:
        ph = lam = None
    failing = {v: node_failures(c, v) for v in c if node_failures(c, v)}
    if args.format == "json":
        print(json.dumps({"verdict": str(verdict), "phi": ph, "lambda": lam,
                          "failing": {str(v): f for v, f in failing.items()}}))
    else:
        print(f"verdict {verdict}")
        print(f"phi {ph if ph is not None else 'undefined'}")
        print(f"lambda {lam if lam is not None else 'undefined'}")
        for v, preds in failing.items():
            print(f"node {v}: {' '.join(preds)}")
    return EXIT_OK if verdict.ok else EXIT_DIVERGED


# --- bench ------------------------------------------------------------------

BENCH_FIELDS = ["n", "trials", "mean_rounds", "max_rounds", "max_label_bits", "max_in_bits"]


def bench_trial(job) -> dict:
    n, trial, seed, model, p, daemon = job
    gseed = seed * 1_000_003 + n * 1_000 + trial
    g = generate_graph(n, model, WEIGHTS, gseed, p if p is not None else min(1.0, 3 / n))
    c = arbitrary_configuration(g, gseed)
    return simulate(g, c, daemon, None, None)


def run_bench(sizes, trials: int, daemon: str = "sync", seed: int = 0, model: str = "random",
              p: float | None = None, jobs: int = 1) -> list[dict]:
    """Per size: mean/max rounds to convergence and peak register bits over arbitrary starts."""
    work = [(n, t, seed, model, p, daemon) for n in sizes for t in range(trials)]
    if jobs > 1 and work:
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(bench_trial, work))
    else:
        results = [bench_trial(w) for w in work]
    rows = []
    for n in sizes:
        mine = [r for (m, *_), r in zip(work, results) if m == n]
        if not mine:
            continue
        bad = [r for r in mine if not (r["stabilized"] and r["verdict"] == "LEGITIMATE")]
        if bad:
            raise RuntimeError(f"{len(bad)} bench trial(s) at n={n} did not stabilize")
        # the confirmation window is detection overhead, so rounds count up to the last tree change
        rounds = [r["converged_round"] for r in mine]
        rows.append({"n": n, "trials": len(mine), "mean_rounds": statistics.fmean(rounds),
                     "max_rounds": max(rounds),
                     "max_label_bits": max(r["max_label_bits"] for r in mine),
                     "max_in_bits": max(r["max_in_bits"] for r in mine)})
    return rows


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log y against log x."""
    return statistics.linear_regression([math.log(x) for x in xs], [math.log(y) for y in ys]).slope


def fit_constant(xs, ys, scale) -> float:
    """Smallest K with y <= K * scale(x) for every point."""
    return max(y / scale(x) for x, y in zip(xs, ys))


def cmd_bench(args) -> int:
    try:
        sizes = [int(x) for x in args.sizes.split(",") if x]
    except ValueError:
        raise UsageError(f"--sizes expects a comma list, got {args.sizes!r}") from None
    rows = run_bench(sizes, args.trials, args.daemon, args.seed, args.model, args.p, args.jobs)
    print(f"# sizes={args.sizes} trials={args.trials} daemon={args.daemon} seed={args.seed} "
          f"model={args.model} p={args.p}")
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=BENCH_FIELDS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    sys.stdout.write(buf.getvalue())
    if len(rows) >= 2:
        ns = [r["n"] for r in rows]
        rs = [r["max_rounds"] for r in rows]
        print(f"# rounds: K={fit_constant(ns, rs, lambda n: n * n):.3f} "
              f"slope={loglog_slope(ns, rs):.3f}")
    return EXIT_OK


# --- argument parsing -------------------------------------------------------

def _add_graph_source(p, required=True):
    src = p.add_mutually_exclusive_group(required=required)
    src.add_argument("--graph", metavar="PATH", help="edge-list file: 'n m' then m lines 'u v w'")
    src.add_argument("--gen", metavar="MODEL:N[:P]", help="generate path|cycle|complete|random")
    p.add_argument("--seed", type=int, default=0, help="generator seed (default 0)")
    p.add_argument("--format", choices=("json", "csv", "human"), default="human")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ssmst", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate until stabilization")
    _add_graph_source(run)
    run.add_argument("--init", default="singleton", help="singleton | arbitrary:SEED")
    run.add_argument("--daemon", default="sync", help="sync | rr | random:SEED")
    run.add_argument("--max-rounds", type=int, default=None, help="default 50*n^2+100")
    run.add_argument("--confirm", type=int, default=None,
                     help="quiet rounds required (default max(2n, n*height))")
    run.add_argument("--trace", metavar="PATH", help="write one JSON line per round")
    run.set_defaults(func=cmd_run)

    orc = sub.add_parser("oracle", help="print the Kruskal MST")
    _add_graph_source(orc)
    orc.set_defaults(func=cmd_oracle)

    ver = sub.add_parser("verify", help="check a saved configuration")
    _add_graph_source(ver)
    ver.add_argument("--state", metavar="PATH", required=True)
    ver.set_defaults(func=cmd_verify)

    ben = sub.add_parser("bench", help="rounds and register size over arbitrary starts")
    ben.add_argument("--sizes", default="8,16,32")
    ben.add_argument("--trials", type=int, default=20)
    ben.add_argument("--daemon", default="sync")
    ben.add_argument("--seed", type=int, default=0)
    ben.add_argument("--model", default="random")
    ben.add_argument("--p", type=float, default=None, help="edge probability (default 3/n)")
    ben.add_argument("--jobs", type=int, default=1)
    ben.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "max_rounds", None) is not None and args.max_rounds < 1:
        print("error: --max-rounds must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, GraphError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
