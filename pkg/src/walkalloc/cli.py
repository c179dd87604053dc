"""Command-line interface.

Exit codes: 0 success, 1 usage error (bad flags, missing input files),
2 runtime failure (infeasible generation, invalid data, disk errors).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .allocation import load_trace
from .graphs import (GraphError, GraphSpec, generate_random_regular, girth,
                     load_fixture, load_graph, save_graph)
from .harness import load_config, resolve_workers, run_experiment
from .metrics import (LightTraceError, check_N_delta, lower_bound_stat,
                      potential_series)
from .params import bounds, derive
from .witness import WitnessTree, build_witness, load_tree, save_tree, \
    verify_witness_tree


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="walkalloc",
                     description="Balanced allocation on d-regular graphs "
                                 "with walk-sampled choice sets")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("params", help="print the derived parameter schedule")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--mode", choices=["dense", "sparse"], default="dense")
    p.add_argument("--rho-constant", type=int, choices=[6, 8], default=6)
    p.add_argument("--c", type=int, default=1)
    p.set_defaults(func=_cmd_params)

    p = sub.add_parser("generate", help="generate a random regular graph")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-girth", type=int, default=None)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("run", help="run an experiment from a TOML config")
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("analyze", help="metrics over saved traces")
    p.add_argument("--trace", type=Path, nargs="+", required=True)
    p.add_argument("--delta", type=int, default=None)
    p.add_argument("--potential-every", type=int, default=None)
    p.add_argument("--graph", type=Path, default=None)
    p.add_argument("--fixture", default=None)
    p.add_argument("--out", type=Path, default=None,
                   help="metrics CSV (default: stdout)")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("witness", help="build or verify witness trees")
    wsub = p.add_subparsers(dest="witness_command", required=True,
                            parser_class=_Parser)
    b = wsub.add_parser("build")
    b.add_argument("--trace", type=Path, required=True)
    b.add_argument("--graph", type=Path, default=None)
    b.add_argument("--fixture", default=None)
    b.add_argument("--node", type=int, default=None,
                   help="start node (default: the most loaded, lowest id)")
    b.add_argument("--c", type=int, default=1)
    b.add_argument("--middle-only", action="store_true")
    b.add_argument("--out", type=Path, required=True)
    b.set_defaults(func=_cmd_witness_build)
    v = wsub.add_parser("verify")
    v.add_argument("--tree", type=Path, required=True)
    v.add_argument("--trace", type=Path, required=True)
    v.add_argument("--graph", type=Path, default=None)
    v.add_argument("--fixture", default=None)
    v.add_argument("--c", type=int, default=None)
    v.set_defaults(func=_cmd_witness_verify)
    return parser


def _require_file(path: Path) -> None:
    if not path.exists():
        raise _Usage(f"file not found: {path}")


class _Usage(Exception):
    pass


def _load_side_graph(args, trace):
    if args.graph is not None:
        _require_file(args.graph)
        return load_graph(args.graph)
    if args.fixture:
        return load_fixture(args.fixture)
    raise _Usage("need --graph FILE or --fixture NAME")


def _cmd_params(args) -> int:
    p = derive(args.n, args.d, args.l, mode=args.mode,
               rho_constant=args.rho_constant)
    b = bounds(p, c=args.c)
    print(f"n={p.n} d={p.d} l={p.l} mode={p.mode}")
    print(f"log_d_n={p.log_d_n:.6f} gamma={p.gamma:.6f} r_G={p.r_g}")
    rho = "unavailable" if p.rho is None else p.rho
    print(f"k={p.k} delta={p.delta} rho={rho} h={p.h}")
    print(f"tau={p.tau:.6f} n1_fraction={p.n1_fraction:.6f}")
    if p.ndelta_threshold is not None:
        print(f"ndelta_threshold={p.ndelta_threshold:.6f} "
              f"ndelta_threshold_pb={p.ndelta_threshold_pb:.6f}")
    if p.degenerate:
        print("degenerate: delta=0, rho-dependent analyses unavailable")
    if p.sparse_degree_ok is not None:
        print(f"sparse_degree_ok={str(p.sparse_degree_ok).lower()}")
    thr = "unavailable" if b.threshold_load is None else b.threshold_load
    print(f"regime={b.regime} upper_guide={b.upper_bound:.6f} "
          f"lower_guide={b.lower_bound:.6f} threshold_load={thr}")
    if b.note:
        print(f"note: {b.note}")
    return 0


def _cmd_generate(args) -> int:
    spec = GraphSpec(kind="random-regular", n=args.n, d=args.d,
                     min_girth=args.min_girth, seed=args.seed)
    g = generate_random_regular(spec)
    save_graph(g, args.out)
    print(f"n={g.n} d={g.d} girth={girth(g)} -> {args.out}")
    return 0


def _cmd_run(args) -> int:
    _require_file(args.config)
    config = load_config(args.config)
    rows = run_experiment(config, workers=resolve_workers(args.workers))
    print(f"{len(rows)} rows -> {config.output_dir / 'results.csv'}")
    return 0


def _cmd_analyze(args) -> int:
    for path in args.trace:
        _require_file(path)
    lines = ["run,metric,t,value"]
    for path in args.trace:
        trace = load_trace(path)
        run = path.name.split(".")[0]
        m = trace.ball_count()
        lines.append(f"{run},max_load,{m},{max(trace.loads)}")
        try:
            stat = lower_bound_stat(trace)
            lines.append(f"{run},tau_hat,{m},{stat.tau_hat}")
            lines.append(f"{run},implied_lower_bound,{m},{stat.implied_load}")
        except LightTraceError:
            pass
        if args.delta:
            try:
                rep = check_N_delta(trace, args.delta)
                lines.append(f"{run},n_delta_max_multiplicity,{m},"
                             f"{rep.max_multiplicity}")
                lines.append(f"{run},n_delta_holds,{m},{int(rep.holds)}")
            except LightTraceError:
                pass
        if args.potential_every:
            g = _load_side_graph(args, trace)
            series = potential_series(trace, g, sample_every=args.potential_every)
            for t, lp in zip(series.timestamps, series.log_phi):
                lines.append(f"{run},log_phi,{t},{lp:.9g}")
    text = "\n".join(lines) + "\n"
    if args.out:
        args.out.write_text(text, encoding="utf-8")
        print(f"metrics -> {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_witness_build(args) -> int:
    _require_file(args.trace)
    trace = load_trace(args.trace)
    g = _load_side_graph(args, trace)
    if trace.strategy.l < 2:
        raise GraphError("trace strategy has no usable walk length")
    mode = "sparse" if trace.strategy.kind == "nbrw-sparse" else "dense"
    p = derive(trace.n, trace.d, trace.strategy.l, mode=mode)
    node = args.node
    if node is None:
        node = max(range(trace.n), key=lambda u: (trace.loads[u], -u))
    result = build_witness(trace, g, node, p, c=args.c,
                           middle_only=args.middle_only)
    if isinstance(result, WitnessTree):
        save_tree(result, args.out)
        print(f"witness tree (lambda={result.lam}, mu={result.mu}) -> {args.out}")
        return 0
    print(f"witness construction failed: {result.reason}"
          + (f" ({result.detail})" if result.detail else ""), file=sys.stderr)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump({"failure": result.reason, "detail": result.detail}, fh)
    return 2


def _cmd_witness_verify(args) -> int:
    _require_file(args.tree)
    _require_file(args.trace)
    trace = load_trace(args.trace)
    g = _load_side_graph(args, trace)
    tree = load_tree(args.tree)
    res = verify_witness_tree(tree, trace, g, c=args.c)
    if res.ok:
        print("witness tree valid")
        return 0
    for violation in res.violations:
        print(f"violation [{violation.kind}]: {violation.detail}",
              file=sys.stderr)
    return 2


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.func(args)
    except _Usage as exc:
        print(f"walkalloc: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failures
        print(f"walkalloc: failed: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
