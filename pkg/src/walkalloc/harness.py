"""Experiment orchestration: configs, seed sweeps, parallel cells, CSV output.

A cell is one (strategy, l, seed-index) triple. Cell seeds are derived by a
stable hash of (base_seed, strategy, l, seed-index), so results are identical
for any worker count and any execution order; rows are sorted before writing.

results.csv columns (fixed schema):
  n,d,l,r_G,strategy,seed,max_load,implied_lower_bound,n_delta_holds,alpha_hat,runtime_ms

The runtime_ms column is the only nondeterministic one; comparisons should use
read_results(..., drop_runtime=True).
"""
from __future__ import annotations

import csv
import json
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from . import metrics as metrics_mod
from . import witness as witness_mod
from .allocation import dump_trace, max_load, parse_strategy, run_allocation
from .graphs import GraphSpec, RegularGraph, build_graph
from .params import DerivedParams, derive
from .rng import stable_cell_seed

WORKERS_ENV = "WALKALLOC_WORKERS"
RESULT_COLUMNS = ["n", "d", "l", "r_G", "strategy", "seed", "max_load",
                  "implied_lower_bound", "n_delta_holds", "alpha_hat",
                  "runtime_ms"]


@dataclass(frozen=True)
class MetricsToggles:
    n_delta: bool = False
    uniformity: bool = False
    potential: bool = False
    lower_bound: bool = False
    witness: bool = False


@dataclass
class ExperimentConfig:
    graph: GraphSpec
    strategies: list[str]
    l_values: list[int]
    spacing_override: int | None = None   # r_G override for nbrw-sparse
    balls: int | None = None              # None -> n
    seeds: int = 1
    base_seed: int = 0
    metrics: MetricsToggles = field(default_factory=MetricsToggles)
    light_trace: bool = False
    save_traces: bool = False
    compress_traces: bool = False
    output_dir: Path = Path("out")

    def __post_init__(self):
        if not self.strategies:
            raise ValueError("config needs at least one strategy")
        if self.seeds < 1:
            raise ValueError("config needs at least one seed")
        if not self.l_values or any(l < 1 for l in self.l_values):
            raise ValueError("l sweep values must be positive")
        self.output_dir = Path(self.output_dir)
        if self.light_trace and self.metrics.witness:
            warnings.warn("witness analysis needs full traces; the witness "
                          "toggle is ignored under light_trace")


def load_config(path: str | Path) -> ExperimentConfig:
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    gsec = raw.get("graph", {})
    spec = GraphSpec(
        kind=gsec.get("kind", "fixture"),
        n=int(gsec.get("n", 0)),
        d=int(gsec.get("d", 0)),
        min_girth=gsec.get("min_girth"),
        seed=int(gsec.get("seed", 0)),
        fixture_name=gsec.get("fixture"),
        path=gsec.get("path"),
    )
    esec = raw.get("experiment", {})
    msec = raw.get("metrics", {})
    tsec = raw.get("traces", {})
    balls = esec.get("balls", 0)
    return ExperimentConfig(
        graph=spec,
        strategies=list(esec.get("strategies", [])),
        l_values=[int(x) for x in esec.get("l_values", [])],
        spacing_override=esec.get("r_g"),
        balls=None if not balls else int(balls),
        seeds=int(esec.get("seeds", 1)),
        base_seed=int(esec.get("base_seed", 0)),
        metrics=MetricsToggles(
            n_delta=bool(msec.get("n_delta", False)),
            uniformity=bool(msec.get("uniformity", False)),
            potential=bool(msec.get("potential", False)),
            lower_bound=bool(msec.get("lower_bound", False)),
            witness=bool(msec.get("witness", False)),
        ),
        light_trace=bool(tsec.get("light", False)),
        save_traces=bool(tsec.get("save", False)),
        compress_traces=bool(tsec.get("compress", False)),
        output_dir=Path(esec.get("output_dir", "out")),
    )


@dataclass(frozen=True)
class ResultRow:
    n: int
    d: int
    l: int
    r_G: int
    strategy: str
    seed: int
    max_load: int
    implied_lower_bound: int | None
    n_delta_holds: bool | None
    alpha_hat: float | None
    runtime_ms: float

    def as_csv(self) -> list[str]:
        return [
            str(self.n), str(self.d), str(self.l), str(self.r_G),
            self.strategy, str(self.seed), str(self.max_load),
            "" if self.implied_lower_bound is None else str(self.implied_lower_bound),
            "" if self.n_delta_holds is None else str(self.n_delta_holds).lower(),
            "" if self.alpha_hat is None else f"{self.alpha_hat:.6f}",
            f"{self.runtime_ms:.3f}",
        ]


def _cell_params(g: RegularGraph, label: str, l: int,
                 spacing_override: int | None) -> tuple[DerivedParams | None, int]:
    mode = "sparse" if label == "nbrw-sparse" else "dense"
    try:
        p = derive(g.n, g.d, l, mode=mode)
    except ValueError:
        return None, 1
    spacing = p.r_g if mode == "sparse" else 1
    if label == "nbrw-sparse" and spacing_override:
        spacing = spacing_override
    return p, spacing


def _run_cell(g: RegularGraph, config: ExperimentConfig, label: str, l: int,
              seed_index: int) -> ResultRow:
    started = time.perf_counter()
    p, spacing = _cell_params(g, label, l, config.spacing_override)
    strategy = parse_strategy(label, l=l, spacing=spacing)
    seed = stable_cell_seed(config.base_seed, label, l, seed_index)
    trace = run_allocation(g, strategy, m_balls=config.balls, seed=seed,
                           light=config.light_trace, params=p)
    stem = f"{label.replace(':', '_')}_l{l}_s{seed_index}"
    out = config.output_dir
    if config.save_traces:
        suffix = ".jsonl.gz" if config.compress_traces else ".jsonl"
        dump_trace(trace, out / f"trace_{stem}{suffix}")
    implied = None
    if config.metrics.lower_bound and not config.light_trace:
        implied = metrics_mod.lower_bound_stat(trace).implied_load
    holds = None
    if (config.metrics.n_delta and not config.light_trace
            and strategy.kind in ("nbrw-dense", "nbrw-sparse")
            and p is not None and not p.degenerate):
        holds = metrics_mod.check_N_delta(trace, p.delta).holds
    alpha = None
    if config.metrics.uniformity:
        # single-run plug-in: n times the busiest node's placement frequency
        alpha = g.n * max_load(trace) / trace.ball_count()
    if config.metrics.potential:
        series = metrics_mod.potential_series(trace, g)
        with open(out / f"metrics_{stem}.csv", "w", encoding="utf-8") as fh:
            fh.write("run,metric,t,value\n")
            for t, lp in zip(series.timestamps, series.log_phi):
                fh.write(f"{stem},log_phi,{t},{lp:.9g}\n")
            for t, am in zip(series.timestamps, series.a_max):
                fh.write(f"{stem},a_max,{t},{am}\n")
            for t, em in zip(series.timestamps, series.empty_min):
                fh.write(f"{stem},empty_min,{t},{em}\n")
    if (config.metrics.witness and not config.light_trace
            and p is not None and not p.degenerate):
        top = max(range(g.n), key=lambda u: (trace.loads[u], -u))
        result = witness_mod.build_witness(trace, g, top, p, c=1)
        if isinstance(result, witness_mod.WitnessTree):
            witness_mod.save_tree(result, out / f"witness_{stem}.json")
        else:
            with open(out / f"witness_{stem}.json", "w", encoding="utf-8") as fh:
                json.dump({"failure": asdict(result)}, fh)
    runtime = (time.perf_counter() - started) * 1000.0
    return ResultRow(n=g.n, d=g.d, l=l, r_G=spacing, strategy=label,
                     seed=seed_index, max_load=max_load(trace),
                     implied_lower_bound=implied, n_delta_holds=holds,
                     alpha_hat=alpha, runtime_ms=runtime)


def resolve_workers(workers: int | None) -> int:
    if workers is not None:
        return max(1, workers)
    env = os.environ.get(WORKERS_ENV)
    return max(1, int(env)) if env else 1


def run_experiment(config: ExperimentConfig,
                   workers: int | None = None) -> list[ResultRow]:
    """Execute all cells (optionally in parallel) and write results.csv.

    Deterministic given the base seed, regardless of worker count.
    """
    config.output_dir.mkdir(parents=True, exist_ok=True)
    g = build_graph(config.graph)
    cells = [(label, l, i)
             for label in config.strategies
             for l in config.l_values
             for i in range(config.seeds)]
    nworkers = resolve_workers(workers)
    if nworkers == 1 or len(cells) == 1:
        rows = [_run_cell(g, config, *cell) for cell in cells]
    else:
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            futures = [pool.submit(_run_cell, g, config, *cell)
                       for cell in cells]
            rows = [f.result() for f in futures]
    rows.sort(key=lambda r: (r.strategy, r.l, r.seed))
    write_results(rows, config.output_dir / "results.csv")
    echo = {
        "graph": asdict(config.graph),
        "strategies": config.strategies,
        "l_values": config.l_values,
        "r_g_override": config.spacing_override,
        "balls": config.balls,
        "seeds": config.seeds,
        "base_seed": config.base_seed,
        "metrics": asdict(config.metrics),
        "light_trace": config.light_trace,
        "save_traces": config.save_traces,
        "compress_traces": config.compress_traces,
    }
    with open(config.output_dir / "config_echo.json", "w", encoding="utf-8") as fh:
        json.dump(echo, fh, indent=1, sort_keys=True)
    return rows


def write_results(rows: list[ResultRow], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for row in rows:
            writer.writerow(row.as_csv())


def read_results(path: str | Path, drop_runtime: bool = False) -> list[dict]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    if drop_runtime:
        for row in rows:
            row.pop("runtime_ms", None)
    return rows
