"""Figures from walkalloc CSV outputs.

Two input schemas are consumed, both produced by the simulation harness:

  results.csv  n,d,l,r_G,strategy,seed,max_load,implied_lower_bound,
               n_delta_holds,alpha_hat,runtime_ms
  metrics CSV  run,metric,t,value

Aggregation (mean/std across seeds) happens here so the result files stay
raw. Plotting never mutates inputs, uses no randomness, and strips volatile
image metadata, so rerunning a job on the same inputs reproduces the output
file byte for byte. Nothing is written when validation fails.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "allocplots"  # deterministic svg ids
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

RESULT_COLUMNS = ["n", "d", "l", "r_G", "strategy", "seed", "max_load",
                  "implied_lower_bound", "n_delta_holds", "alpha_hat",
                  "runtime_ms"]
METRIC_COLUMNS = ["run", "metric", "t", "value"]
KINDS = ("max-load-vs-l", "max-load-vs-strategy", "metric-hist", "phi-series")

# optional columns overlaid as guide curves when present in results.csv
GUIDE_COLUMNS = ("bound_upper", "bound_lower")


class SchemaError(ValueError):
    """Input CSV does not match the documented schema or selects nothing."""


@dataclass
class PlotJob:
    inputs: list[Path]
    kind: str
    out: Path
    group_by: list[str] = field(default_factory=lambda: ["strategy"])
    metric: str = "tau_hat"   # metric-hist only
    bins: int = 10
    dpi: int = 120
    title: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}")
        self.inputs = [Path(p) for p in self.inputs]
        self.out = Path(self.out)


def read_rows(paths: list[Path], required: list[str]) -> list[dict]:
    rows: list[dict] = []
    for path in paths:
        if not path.exists():
            raise SchemaError(f"input not found: {path}")
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            missing = [c for c in required if c not in header]
            if missing:
                raise SchemaError(
                    f"{path}: missing columns {missing} (have {header})")
            rows.extend(reader)
    if not rows:
        raise SchemaError("empty selection: no data rows in inputs")
    return rows


def _group_key(row: dict, group_by: list[str]) -> str:
    for col in group_by:
        if col not in row:
            raise SchemaError(f"group-by column {col!r} not in the data")
    return "/".join(row[col] for col in group_by)


def _mean_std(values: list[float]) -> tuple[float, float]:
    m = sum(values) / len(values)
    var = sum((v - m) ** 2 for v in values) / len(values)
    return m, math.sqrt(var)


def aggregate_by_l(rows: list[dict], group_by: list[str]
                   ) -> dict[str, tuple[list[int], list[float], list[float]]]:
    """group key -> (sorted l values, mean max_load, std across seeds)."""
    buckets: dict[str, dict[int, list[float]]] = {}
    for row in rows:
        key = _group_key(row, group_by)
        buckets.setdefault(key, {}).setdefault(int(row["l"]), []).append(
            float(row["max_load"]))
    out = {}
    for key, per_l in sorted(buckets.items()):
        ls = sorted(per_l)
        stats = [_mean_std(per_l[l]) for l in ls]
        out[key] = (ls, [m for m, _ in stats], [s for _, s in stats])
    return out


def aggregate_by_group(rows: list[dict], group_by: list[str]
                       ) -> dict[str, tuple[float, float]]:
    buckets: dict[str, list[float]] = {}
    for row in rows:
        buckets.setdefault(_group_key(row, group_by), []).append(
            float(row["max_load"]))
    return {key: _mean_std(vals) for key, vals in sorted(buckets.items())}


def _guide_curves(rows: list[dict]) -> dict[str, tuple[list[int], list[float]]]:
    curves = {}
    for col in GUIDE_COLUMNS:
        pts: dict[int, list[float]] = {}
        for row in rows:
            raw = row.get(col, "")
            if raw:
                pts.setdefault(int(row["l"]), []).append(float(raw))
        if pts:
            ls = sorted(pts)
            curves[col] = (ls, [sum(pts[l]) / len(pts[l]) for l in ls])
    return curves


def _save(fig, job: PlotJob) -> Path:
    job.out.parent.mkdir(parents=True, exist_ok=True)
    # strip volatile metadata so identical inputs give identical bytes
    if job.out.suffix == ".svg":
        metadata = {"Date": None}
    else:
        metadata = {"Software": None}
    fig.savefig(job.out, dpi=job.dpi, metadata=metadata)
    plt.close(fig)
    return job.out


def _plot_max_load_vs_l(job: PlotJob) -> Path:
    rows = read_rows(job.inputs, RESULT_COLUMNS)
    series = aggregate_by_l(rows, job.group_by)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for key, (ls, means, stds) in series.items():
        ax.plot(ls, means, marker="o", label=key)
        lo = [m - s for m, s in zip(means, stds)]
        hi = [m + s for m, s in zip(means, stds)]
        ax.fill_between(ls, lo, hi, alpha=0.2)
    for name, (ls, vals) in _guide_curves(rows).items():
        ax.plot(ls, vals, linestyle="--", linewidth=1, label=name)
    ax.set_xlabel("walk length l")
    ax.set_ylabel("max load (mean +/- std over seeds)")
    ax.set_xticks(sorted({int(r["l"]) for r in rows}))
    ax.legend()
    ax.set_title(job.title or "maximum load vs walk length")
    return _save(fig, job)


def _plot_max_load_vs_strategy(job: PlotJob) -> Path:
    rows = read_rows(job.inputs, RESULT_COLUMNS)
    stats = aggregate_by_group(rows, job.group_by)
    keys = list(stats)
    means = [stats[k][0] for k in keys]
    stds = [stats[k][1] for k in keys]
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.bar(range(len(keys)), means, yerr=stds, capsize=4)
    ax.set_xticks(range(len(keys)))
    ax.set_xticklabels(keys, rotation=20, ha="right")
    ax.set_ylabel("max load (mean +/- std over seeds)")
    ax.set_title(job.title or "maximum load by strategy")
    fig.tight_layout()
    return _save(fig, job)


def _plot_metric_hist(job: PlotJob) -> Path:
    rows = read_rows(job.inputs, METRIC_COLUMNS)
    values = [float(r["value"]) for r in rows if r["metric"] == job.metric]
    if not values:
        raise SchemaError(f"empty selection: no rows with metric "
                          f"{job.metric!r}")
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.hist(values, bins=job.bins)
    ax.set_xlabel(job.metric)
    ax.set_ylabel("count")
    ax.set_title(job.title or f"distribution of {job.metric}")
    return _save(fig, job)


def _plot_phi_series(job: PlotJob) -> Path:
    rows = read_rows(job.inputs, METRIC_COLUMNS)
    series: dict[str, list[tuple[int, float]]] = {}
    for r in rows:
        if r["metric"] == "log_phi":
            series.setdefault(r["run"], []).append(
                (int(r["t"]), float(r["value"])))
    if not series:
        raise SchemaError("empty selection: no log_phi rows")
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for run, pts in sorted(series.items()):
        pts.sort()
        ax.plot([t for t, _ in pts], [v for _, v in pts], label=run)
    ax.set_xlabel("balls placed")
    ax.set_ylabel("ln of the neighborhood potential")
    if len(series) <= 12:
        ax.legend(fontsize=7)
    ax.set_title(job.title or "potential over time")
    return _save(fig, job)


_DISPATCH = {
    "max-load-vs-l": _plot_max_load_vs_l,
    "max-load-vs-strategy": _plot_max_load_vs_strategy,
    "metric-hist": _plot_metric_hist,
    "phi-series": _plot_phi_series,
}


def plot(job: PlotJob) -> Path:
    """Render one figure; returns the written path. Raises SchemaError (and
    writes nothing) when inputs are missing, malformed, or select no data."""
    return _DISPATCH[job.kind](job)
