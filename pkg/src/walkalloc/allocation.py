"""Sequential ball allocation processes and their traces.

Strategies:
  nbrw-dense    walk of length l, all l+1 visited nodes are candidates
  nbrw-sparse   walk of length l*spacing, every spacing-th node is a candidate
  one-choice    a single uniform node
  d-choice      k independent uniform nodes, least loaded wins
  local-search  uniform start, greedy descent to a local load minimum

All min-load strategies break ties uniformly at random over the distinct
candidates. A run is strictly sequential; concurrency only exists across
independent runs with their own seeds.
"""
from __future__ import annotations

import gzip
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO

import numpy as np

from .graphs import RegularGraph
from .params import DerivedParams
from .rng import make_rng
from .walks import _sample_walk_nodes

STRATEGY_KINDS = ("nbrw-dense", "nbrw-sparse", "one-choice", "d-choice",
                  "local-search")
_CONSERVATION_STRIDE = 1 << 16


@dataclass(frozen=True)
class Strategy:
    kind: str
    l: int = 0           # walk parameter (nbrw strategies)
    spacing: int = 1     # choice spacing (nbrw-sparse)
    k_choices: int = 2   # fan-out (d-choice)

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        if self.kind in ("nbrw-dense", "nbrw-sparse") and self.l < 1:
            raise ValueError("nbrw strategies need l >= 1")
        if self.kind == "nbrw-sparse" and self.spacing < 1:
            raise ValueError("nbrw-sparse needs spacing >= 1")
        if self.kind == "d-choice" and self.k_choices < 1:
            raise ValueError("d-choice needs k_choices >= 1")

    @property
    def uses_walks(self) -> bool:
        return self.kind in ("nbrw-dense", "nbrw-sparse", "local-search")

    def walk_span(self) -> int:
        if self.kind == "nbrw-dense":
            return self.l
        if self.kind == "nbrw-sparse":
            return self.l * self.spacing
        return 0

    def label(self) -> str:
        if self.kind == "d-choice":
            return f"d-choice:{self.k_choices}"
        return self.kind


def parse_strategy(text: str, l: int = 0, spacing: int = 1) -> Strategy:
    """Inverse of Strategy.label(), binding the sweep's l and spacing."""
    text = text.strip()
    if text.startswith("d-choice"):
        k = 2
        if ":" in text:
            k = int(text.split(":", 1)[1])
        return Strategy("d-choice", l=l, k_choices=k)
    if text == "nbrw-sparse":
        return Strategy("nbrw-sparse", l=l, spacing=spacing)
    if text == "nbrw-dense":
        return Strategy("nbrw-dense", l=l)
    return Strategy(text, l=l)


@dataclass(frozen=True)
class BallRecord:
    t: int
    walk: tuple[int, ...] | None  # None in light traces
    choices: tuple[int, ...]
    chosen: int
    height: int


@dataclass
class AllocationTrace:
    n: int
    d: int
    strategy: Strategy
    seed: int
    loads: list[int] = field(default_factory=list)
    balls: list[BallRecord] = field(default_factory=list)
    params: DerivedParams | None = None
    light: bool = False

    def __post_init__(self):
        if not self.loads:
            self.loads = [0] * self.n

    def ball_count(self) -> int:
        return len(self.balls)


def pick_min_load(loads, choices, rng: np.random.Generator) -> int:
    """Least-loaded node among the distinct choices, ties uniform."""
    distinct = list(dict.fromkeys(choices))
    best = min(loads[c] for c in distinct)
    mins = [c for c in distinct if loads[c] == best]
    if len(mins) == 1:
        return mins[0]
    return mins[int(rng.integers(len(mins)))]


def _descend(g: RegularGraph, start: int, loads, rng) -> list[int]:
    """Greedy descent: hop to a uniform choice among the neighbors attaining
    the minimum neighbor load while that minimum is strictly smaller."""
    path = [start]
    cur = start
    while True:
        row = g.rows[cur]
        best = min(loads[v] for v in row)
        if best >= loads[cur]:
            return path
        mins = [v for v in row if loads[v] == best]
        cur = mins[int(rng.integers(len(mins)))] if len(mins) > 1 else mins[0]
        path.append(cur)


def allocate_one(trace: AllocationTrace, g: RegularGraph, strategy: Strategy,
                 rng: np.random.Generator) -> BallRecord:
    """Place the next ball; returns its record (also appended to the trace)."""
    loads = trace.loads
    kind = strategy.kind
    walk: tuple[int, ...] | None
    if kind == "one-choice":
        v = int(rng.integers(trace.n))
        choices = (v,)
        walk = choices
        chosen = v
    elif kind == "d-choice":
        choices = tuple(int(x) for x in
                        rng.integers(0, trace.n, size=strategy.k_choices))
        walk = choices
        chosen = pick_min_load(loads, choices, rng)
    elif kind == "local-search":
        start = int(rng.integers(trace.n))
        path = _descend(g, start, loads, rng)
        choices = tuple(path)
        walk = choices
        chosen = path[-1]
    else:
        span = strategy.walk_span()
        nodes = _sample_walk_nodes(g, span, rng)
        walk = tuple(nodes)
        step = strategy.spacing if kind == "nbrw-sparse" else 1
        choices = tuple(nodes[i] for i in range(0, span + 1, step))
        chosen = pick_min_load(loads, choices, rng)
    height = loads[chosen]
    record = BallRecord(
        t=len(trace.balls),
        walk=None if trace.light else walk,
        choices=choices,
        chosen=chosen,
        height=height,
    )
    loads[chosen] += 1
    trace.balls.append(record)
    return record


def run_allocation(g: RegularGraph, strategy: Strategy, m_balls: int | None = None,
                   seed: int = 0, light: bool = False,
                   params: DerivedParams | None = None) -> AllocationTrace:
    """Allocate m_balls sequentially (default: n, the analyzed regime).

    Deterministic for fixed (graph, strategy, seed). Conservation of balls is
    checked every 2^16 placements and at the end.
    """
    m = g.n if m_balls is None else m_balls
    if m < 1:
        raise ValueError("m_balls must be >= 1")
    if m > g.n:
        warnings.warn(f"m_balls={m} exceeds n={g.n}: outside the analyzed "
                      f"one-ball-per-bin regime")
    rng = make_rng(seed)
    trace = AllocationTrace(n=g.n, d=g.d, strategy=strategy, seed=seed,
                            params=params, light=light)
    for t in range(m):
        allocate_one(trace, g, strategy, rng)
        if (t + 1) % _CONSERVATION_STRIDE == 0 and sum(trace.loads) != t + 1:
            raise AssertionError("ball conservation violated mid-run")
    if sum(trace.loads) != m:
        raise AssertionError("ball conservation violated at end of run")
    return trace


def max_load(trace: AllocationTrace) -> int:
    return max(trace.loads) if trace.loads else 0


def validate_trace(trace: AllocationTrace, g: RegularGraph | None = None) -> list[str]:
    """Replay the trace from scratch and report violations (empty = valid).

    Checks conservation, choice containment, height bookkeeping, and the
    min-load rule for the min-load strategies; with a graph, also walk
    adjacency/non-backtracking and local-search descent legality.
    """
    violations: list[str] = []
    loads = [0] * trace.n
    kind = trace.strategy.kind
    for rec in trace.balls:
        if rec.chosen not in rec.choices:
            violations.append(f"ball {rec.t}: chosen node not among choices")
        if rec.height != loads[rec.chosen]:
            violations.append(f"ball {rec.t}: height {rec.height} != load "
                              f"{loads[rec.chosen]} before placement")
        if kind in ("nbrw-dense", "nbrw-sparse", "d-choice", "one-choice"):
            best = min(loads[c] for c in set(rec.choices))
            if loads[rec.chosen] != best:
                violations.append(f"ball {rec.t}: chosen load {loads[rec.chosen]}"
                                  f" != min over choices {best}")
        elif kind == "local-search":
            path = rec.choices
            if rec.chosen != path[-1]:
                violations.append(f"ball {rec.t}: chosen is not the descent end")
            for a, b in zip(path, path[1:]):
                if loads[b] >= loads[a]:
                    violations.append(f"ball {rec.t}: descent step {a}->{b} "
                                      f"does not decrease load")
                if g is not None and not g.has_edge(a, b):
                    violations.append(f"ball {rec.t}: descent step {a}->{b} "
                                      f"is not an edge")
            if g is not None:
                end = path[-1]
                if any(loads[v] < loads[end] for v in g.rows[end]):
                    violations.append(f"ball {rec.t}: descent stopped above a "
                                      f"smaller-loaded neighbor")
        if g is not None and rec.walk is not None and kind in (
                "nbrw-dense", "nbrw-sparse"):
            w = rec.walk
            for i in range(1, len(w)):
                if not g.has_edge(w[i - 1], w[i]):
                    violations.append(f"ball {rec.t}: walk step {i} not an edge")
                    break
                if i >= 2 and w[i] == w[i - 2]:
                    violations.append(f"ball {rec.t}: walk backtracks at {i}")
                    break
        loads[rec.chosen] += 1
    if loads != trace.loads:
        violations.append("final loads do not match the recorded loads")
    if sum(loads) != len(trace.balls):
        violations.append("conservation: sum of loads != number of balls")
    return violations


# ---------------------------------------------------------------------------
# Trace dumps: JSON-lines with a header record, then one record per ball.
# `.gz` suffix switches on gzip compression. Loads also dump to CSV.
# ---------------------------------------------------------------------------

def _open_text(path: str | Path, mode: str) -> IO[str]:
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, mode + "t", encoding="utf-8")
    return open(path, mode, encoding="utf-8")


def dump_trace(trace: AllocationTrace, path: str | Path) -> None:
    header = {
        "n": trace.n,
        "d": trace.d,
        "l": trace.strategy.l,
        "r_G": trace.strategy.spacing,
        "strategy": trace.strategy.label(),
        "seed": trace.seed,
    }
    with _open_text(path, "w") as fh:
        fh.write(json.dumps(header) + "\n")
        for rec in trace.balls:
            fh.write(json.dumps({
                "t": rec.t,
                "walk": list(rec.walk) if rec.walk is not None else None,
                "choices": list(rec.choices),
                "chosen": rec.chosen,
                "height": rec.height,
            }) + "\n")


def load_trace(path: str | Path) -> AllocationTrace:
    with _open_text(path, "r") as fh:
        header = json.loads(fh.readline())
        strategy = parse_strategy(header["strategy"], l=header.get("l", 0),
                                  spacing=header.get("r_G", 1))
        trace = AllocationTrace(n=header["n"], d=header["d"], strategy=strategy,
                                seed=header.get("seed", 0))
        light = False
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            walk = obj.get("walk")
            if walk is None:
                light = True
            rec = BallRecord(
                t=obj["t"],
                walk=tuple(walk) if walk is not None else None,
                choices=tuple(obj["choices"]),
                chosen=obj["chosen"],
                height=obj["height"],
            )
            trace.balls.append(rec)
            trace.loads[rec.chosen] += 1
    trace.light = light
    return trace


def dump_loads_csv(trace: AllocationTrace, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("node,load\n")
        for node, load in enumerate(trace.loads):
            fh.write(f"{node},{load}\n")


def one_choice_reference_scale(n: int) -> float:
    """The classical ln n / lnln n reference scale for one-choice."""
    return math.log(n) / math.log(math.log(n))
