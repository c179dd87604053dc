"""Diagnostics over traces: subpath multiplicities, the pigeonhole lower
bound, placement uniformity, and the nonempty-neighborhood potential."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .allocation import AllocationTrace, Strategy, allocate_one
from .graphs import RegularGraph, girth
from .rng import make_rng
from .walks import canonical, sample_walks


class LightTraceError(ValueError):
    """The requested diagnostic needs walks, but the trace dropped them."""


def _require_walks(trace: AllocationTrace):
    if trace.light or any(rec.walk is None for rec in trace.balls):
        raise LightTraceError("trace does not retain walks")


# ---------------------------------------------------------------------------
# Subpath multiplicities and the N_delta event
# ---------------------------------------------------------------------------

@dataclass
class PathMultiplicityIndex:
    """How many chosen walks contain each canonical (orientation-free) subpath
    of the given length. A subpath repeated inside one walk counts once.

    exact=False marks the bounded-memory mode, whose per-key counts and
    max_multiplicity are upper bounds on the true values."""

    subpath_length: int
    counts: dict[tuple[int, ...], int]
    max_multiplicity: int
    argmax_path: tuple[int, ...]
    exact: bool = True


def build_multiplicity_index(trace: AllocationTrace, subpath_length: int,
                             max_keys: int | None = None
                             ) -> PathMultiplicityIndex:
    """Count walks per canonical subpath; exact by default.

    With max_keys set, a space-saving summary keeps at most that many
    counters: evicting the smallest counter charges its count to the new key,
    so surviving counts only ever overestimate and the reported maximum is a
    valid upper bound for the true maximum.
    """
    if subpath_length < 1:
        raise ValueError("subpath length must be >= 1")
    if max_keys is not None and max_keys < 1:
        raise ValueError("max_keys must be >= 1")
    _require_walks(trace)
    exact = True
    counts: dict[tuple[int, ...], int] = Counter()
    for rec in trace.balls:
        w = rec.walk
        keys = {canonical(w[i:i + subpath_length + 1])
                for i in range(len(w) - subpath_length)}
        if max_keys is None:
            counts.update(keys)
            continue
        for key in keys:
            if key in counts:
                counts[key] += 1
            elif len(counts) < max_keys:
                counts[key] = 1
            else:
                exact = False
                victim = min(counts.items(), key=lambda kv: (kv[1], kv[0]))[0]
                counts[key] = counts.pop(victim) + 1
    if not counts:
        return PathMultiplicityIndex(subpath_length, {}, 0, ())
    argmax, top = max(counts.items(), key=lambda kv: (kv[1], kv[0]))
    return PathMultiplicityIndex(subpath_length, dict(counts), top, argmax,
                                 exact=exact)


@dataclass(frozen=True)
class NDeltaReport:
    holds: bool
    max_multiplicity: int
    threshold: float
    delta: int
    argmax_path: tuple[int, ...]


def check_N_delta(trace: AllocationTrace, delta: int) -> NDeltaReport:
    """Does every length-delta path lie in fewer than 6*log_{d-1} n / delta of
    the chosen walks?"""
    index = build_multiplicity_index(trace, delta)
    threshold = 6 * math.log(trace.n) / math.log(trace.d - 1) / delta
    return NDeltaReport(
        holds=index.max_multiplicity < threshold,
        max_multiplicity=index.max_multiplicity,
        threshold=threshold,
        delta=delta,
        argmax_path=index.argmax_path,
    )


# ---------------------------------------------------------------------------
# Pigeonhole lower bound from full-walk multiplicity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LowerBoundStat:
    tau_hat: int          # multiplicity of the most-chosen walk (canonical)
    implied_load: int     # ceil(tau_hat / number of choices): true lower bound
    argmax_walk: tuple[int, ...]
    tau_reference: float | None  # the schedule's tau, when params are attached


def lower_bound_stat(trace: AllocationTrace) -> LowerBoundStat:
    """Balls sharing one walk share one choice set, so the busiest walk forces
    load >= ceil(multiplicity / choice count) somewhere in that set."""
    _require_walks(trace)
    counts: Counter = Counter()
    sizes: dict[tuple[int, ...], int] = {}
    for rec in trace.balls:
        key = canonical(rec.walk)
        counts[key] += 1
        sizes[key] = len(rec.choices)
    if not counts:
        return LowerBoundStat(0, 0, (), None)
    argmax, tau_hat = max(counts.items(), key=lambda kv: (kv[1], kv[0]))
    implied = math.ceil(tau_hat / sizes[argmax])
    tau_ref = trace.params.tau if trace.params is not None else None
    return LowerBoundStat(tau_hat=tau_hat, implied_load=implied,
                          argmax_walk=argmax, tau_reference=tau_ref)


# ---------------------------------------------------------------------------
# Placement uniformity
# ---------------------------------------------------------------------------

@dataclass
class UniformityReport:
    """Empirical per-node placement probabilities over ball-index windows.

    alpha_hat is n times the largest estimated probability that some ball in
    some window lands on some fixed node; any nontrivial run has
    alpha_hat >= 1 up to sampling noise because the max dominates the average.
    """

    alpha_hat: float
    alpha_hat_half: float | None  # same estimate from the first half of the
                                  # runs; compare against alpha_hat to judge
                                  # stabilization as trials grow
    n1_used: int
    runs: int
    windows: int
    per_node_freq: np.ndarray    # (n,) average placement frequency per ball
    window_freq: np.ndarray      # (n, windows) per-window estimates
    low_sample: bool


def estimate_uniformity(g: RegularGraph, strategy: Strategy, n1: int,
                        trials: int, seed: int = 0, windows: int = 16
                        ) -> UniformityReport:
    """Repeat fresh runs of n1 balls until ~trials placements are collected.

    trials below 1000*n raises the low_sample flag. Ball indices are bucketed
    into equal windows so time drift is visible without per-ball noise.
    """
    if n1 < 1:
        raise ValueError("n1 must be >= 1")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    runs = max(1, trials // n1)
    runs_half = runs // 2
    windows = max(1, min(windows, n1))
    edges = np.linspace(0, n1, windows + 1).astype(np.int64)
    window_of = np.searchsorted(edges, np.arange(n1), side="right") - 1
    counts = np.zeros((g.n, windows), dtype=np.int64)
    counts_half = None

    placements = _first_ball_fast_path(g, strategy, runs, seed) if n1 == 1 else None
    if placements is not None:
        np.add.at(counts[:, 0], placements, 1)
        if runs_half:
            counts_half = np.zeros_like(counts)
            np.add.at(counts_half[:, 0], placements[:runs_half], 1)
    else:
        rng = make_rng(seed)
        for run in range(runs):
            if run == runs_half and runs_half:
                counts_half = counts.copy()
            trace = AllocationTrace(n=g.n, d=g.d, strategy=strategy, seed=seed,
                                    light=True)
            for t in range(n1):
                rec = allocate_one(trace, g, strategy, rng)
                counts[rec.chosen, window_of[t]] += 1

    width = np.diff(edges).astype(np.float64)  # balls per window
    window_freq = counts / (runs * width[None, :])
    per_node = counts.sum(axis=1) / (runs * n1)
    alpha_hat = float(window_freq.max() * g.n)
    alpha_half = None
    if counts_half is not None:
        alpha_half = float((counts_half / (runs_half * width[None, :])).max()
                           * g.n)
    return UniformityReport(
        alpha_hat=alpha_hat,
        alpha_hat_half=alpha_half,
        n1_used=n1,
        runs=runs,
        windows=windows,
        per_node_freq=per_node,
        window_freq=window_freq,
        low_sample=trials < 1000 * g.n,
    )


def _first_ball_fast_path(g: RegularGraph, strategy: Strategy, runs: int,
                          seed: int) -> np.ndarray | None:
    """Vectorized first-ball placements (all loads zero, ties over distinct
    candidates). Only safe when candidates are guaranteed distinct."""
    rng = make_rng(seed)
    if strategy.kind == "one-choice":
        return rng.integers(0, g.n, size=runs)
    if strategy.kind not in ("nbrw-dense", "nbrw-sparse"):
        return None
    span = strategy.walk_span()
    if girth(g) <= span:
        return None  # walks may repeat nodes; use the generic loop
    walks = sample_walks(g, span, runs, rng)
    step = strategy.spacing if strategy.kind == "nbrw-sparse" else 1
    cand = walks[:, ::step]
    pick = rng.integers(0, cand.shape[1], size=runs)
    return cand[np.arange(runs), pick]


# ---------------------------------------------------------------------------
# Nonempty-neighborhood potential
# ---------------------------------------------------------------------------

@dataclass
class PotentialSeries:
    """ln of sum_u exp(a_t(u)), where a_t(u) counts nonempty neighbors of u.

    Exponentials are evaluated in log-sum-exp form since a_t(u) <= d can reach
    hundreds. The threshold flag compares the value at check_t against
    ln n + d/4.
    """

    timestamps: list[int] = field(default_factory=list)
    log_phi: list[float] = field(default_factory=list)
    a_max: list[int] = field(default_factory=list)
    empty_min: list[int] = field(default_factory=list)
    threshold_log: float = 0.0
    check_t: int = 0
    exceeded: bool = False


def _log_sum_exp_counts(a: np.ndarray) -> float:
    m = int(a.max())
    return m + math.log(float(np.exp(a - m).sum()))


def potential_series(trace: AllocationTrace, g: RegularGraph,
                     sample_every: int | None = None,
                     check_t: int | None = None) -> PotentialSeries:
    """Replay the trace, maintaining nonempty-neighbor counts incrementally,
    and sample the potential every sample_every balls (plus t=0 and the end)."""
    m = trace.ball_count()
    if sample_every is None:
        sample_every = max(1, m // 64)
    if check_t is None:
        check_t = m
    a = np.zeros(g.n, dtype=np.int64)
    loads = np.zeros(g.n, dtype=np.int64)
    series = PotentialSeries(threshold_log=math.log(g.n) + g.d / 4.0,
                             check_t=check_t)
    check_log_phi = math.log(g.n)  # value at t=0

    def sample(t: int):
        series.timestamps.append(t)
        series.log_phi.append(_log_sum_exp_counts(a))
        series.a_max.append(int(a.max()))
        series.empty_min.append(int(g.d - a.max()))

    sample(0)
    for rec in trace.balls:
        v = rec.chosen
        if loads[v] == 0:
            a[g.adjacency[v]] += 1
        loads[v] += 1
        t = rec.t + 1
        if t % sample_every == 0 or t == m:
            sample(t)
        if t == check_t:
            check_log_phi = _log_sum_exp_counts(a)
    series.exceeded = check_log_phi >= series.threshold_log
    return series


def empty_neighborhood_min(trace: AllocationTrace, g: RegularGraph, t: int) -> int:
    """min over nodes u of the number of empty nodes in N(u) after t balls,
    recounted from scratch (the oracle for the incremental series)."""
    if t > trace.ball_count():
        raise ValueError("t exceeds the number of balls in the trace")
    loads = np.zeros(g.n, dtype=np.int64)
    for rec in trace.balls[:t]:
        loads[rec.chosen] += 1
    nonempty = (loads > 0).astype(np.int64)
    filled = nonempty[g.adjacency].sum(axis=1)
    return int((g.d - filled).min())
