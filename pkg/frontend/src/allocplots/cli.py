"""Standalone plotting entry point; flags mirror the PlotJob fields."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .plotting import KINDS, PlotJob, SchemaError, plot


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="allocplot",
                     description="Render figures from walkalloc CSV outputs")
    parser.add_argument("--input", type=Path, action="append", required=True,
                        help="results.csv or metrics CSV (repeatable)")
    parser.add_argument("--kind", choices=KINDS, required=True)
    parser.add_argument("--out", type=Path, required=True)
    parser.add_argument("--group-by", default="strategy",
                        help="comma-separated grouping columns")
    parser.add_argument("--metric", default="tau_hat")
    parser.add_argument("--bins", type=int, default=10)
    parser.add_argument("--dpi", type=int, default=120)
    parser.add_argument("--title", default=None)
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    job = PlotJob(
        inputs=args.input,
        kind=args.kind,
        out=args.out,
        group_by=[c.strip() for c in args.group_by.split(",") if c.strip()],
        metric=args.metric,
        bins=args.bins,
        dpi=args.dpi,
        title=args.title,
    )
    try:
        written = plot(job)
    except SchemaError as exc:
        print(f"allocplot: error: {exc}", file=sys.stderr)
        return 2
    print(written)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
