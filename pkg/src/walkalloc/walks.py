"""Non-backtracking random walks and the choice sets they induce.

A walk of length L visits L+1 nodes; consecutive nodes are adjacent and the
walker never reuses the edge it just arrived on. When the graph's girth
exceeds L every visited node is distinct, i.e. the walk is a path.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .graphs import RegularGraph, girth


def canonical(seq) -> tuple[int, ...]:
    """Orientation-free key for a node sequence: the lexicographically smaller
    of the sequence and its reverse."""
    fwd = tuple(int(x) for x in seq)
    rev = fwd[::-1]
    return fwd if fwd <= rev else rev


@dataclass(frozen=True)
class Walk:
    """An ordered non-backtracking node sequence."""

    nodes: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.nodes) - 1

    @cached_property
    def as_set(self) -> frozenset[int]:
        return frozenset(self.nodes)

    def is_path(self) -> bool:
        return len(self.as_set) == len(self.nodes)


@dataclass(frozen=True)
class ChoiceSet:
    """A ball's candidate bins: every `spacing`-th node of the underlying walk.

    Dense mode uses spacing 1 (all walk nodes); sparse mode walks l*spacing
    edges and keeps l+1 evenly spaced nodes.
    """

    walk: Walk
    choices: tuple[int, ...]
    mode: str  # dense | sparse
    spacing: int

    def __post_init__(self):
        if self.mode not in ("dense", "sparse"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.walk.length % self.spacing != 0:
            raise ValueError("walk length must be a multiple of the spacing")
        expect = tuple(self.walk.nodes[i] for i in
                       range(0, self.walk.length + 1, self.spacing))
        if self.choices != expect:
            raise ValueError("choices are not the evenly spaced walk nodes")


def sample_nbrw(g: RegularGraph, length: int, rng: np.random.Generator) -> Walk:
    """One walk: uniform start, uniform first step over d neighbors, then
    uniform over the d-1 neighbors excluding the predecessor.

    Every ordered walk of the given length has probability
    1/(n * d * (d-1)^(length-1)).
    """
    if length < 1:
        raise ValueError("walk length must be >= 1")
    nodes = _sample_walk_nodes(g, length, rng)
    if __debug__:
        rows = g.rows
        for i in range(1, len(nodes)):
            assert nodes[i] in rows[nodes[i - 1]], "walk step not an edge"
            if i >= 2:
                assert nodes[i] != nodes[i - 2], "walk backtracked"
    return Walk(tuple(nodes))


def _sample_walk_nodes(g: RegularGraph, length: int,
                       rng: np.random.Generator) -> list[int]:
    rows = g.rows
    n, d = g.n, g.d
    prev = int(rng.integers(n))
    cur = rows[prev][int(rng.integers(d))]
    nodes = [prev, cur]
    if length >= 2:
        # skip the predecessor's slot in the sorted row: draw over d-1 slots
        slots = rng.integers(0, d - 1, size=length - 1)
        for i in range(length - 1):
            row = rows[cur]
            pos = _index_in_sorted(row, prev)
            s = int(slots[i])
            if s >= pos:
                s += 1
            prev, cur = cur, row[s]
            nodes.append(cur)
    return nodes


def _index_in_sorted(row: list[int], value: int) -> int:
    lo, hi = 0, len(row)
    while lo < hi:
        mid = (lo + hi) // 2
        if row[mid] < value:
            lo = mid + 1
        else:
            hi = mid
    return lo


def sample_walks(g: RegularGraph, length: int, count: int,
                 rng: np.random.Generator) -> np.ndarray:
    """Batch sampler: (count, length+1) array of node ids, same step law as
    sample_nbrw (vectorized; separate RNG stream layout)."""
    if length < 1:
        raise ValueError("walk length must be >= 1")
    adj = g.adjacency
    n, d = g.n, g.d
    out = np.empty((count, length + 1), dtype=np.int64)
    out[:, 0] = rng.integers(0, n, size=count)
    out[:, 1] = adj[out[:, 0], rng.integers(0, d, size=count)]
    for i in range(2, length + 1):
        cur = out[:, i - 1]
        prev = out[:, i - 2]
        nbrs = adj[cur]
        pos = (nbrs < prev[:, None]).sum(axis=1)  # predecessor's slot (rows sorted)
        slot = rng.integers(0, d - 1, size=count)
        slot = slot + (slot >= pos)
        out[:, i] = nbrs[np.arange(count), slot]
    return out


def make_choice_set(g: RegularGraph, l: int, mode: str, r_g: int,
                    rng: np.random.Generator) -> ChoiceSet:
    """Sample a walk and expose its evenly spaced nodes as potential choices.

    Dense: walk length l, spacing 1. Sparse: walk length l*r_g, choices at
    indices 0, r_g, 2*r_g, ..., l*r_g.
    """
    if mode == "dense":
        spacing = 1
    elif mode == "sparse":
        if r_g < 1:
            raise ValueError("sparse mode needs r_g >= 1")
        spacing = r_g
    else:
        raise ValueError(f"unknown mode {mode!r}")
    walk = sample_nbrw(g, l * spacing, rng)
    choices = tuple(walk.nodes[i] for i in range(0, l * spacing + 1, spacing))
    return ChoiceSet(walk=walk, choices=choices, mode=mode, spacing=spacing)


@dataclass(frozen=True)
class VisitStats:
    """Empirical walk-visit frequencies against the exact uniform law."""

    trials: int
    position_freq: np.ndarray   # (n, length+1): P[node v is the i-th visit]
    inclusion_freq: np.ndarray  # (n,): P[v visited at least once]
    max_position_dev: float     # max |position_freq - 1/n|
    max_inclusion_dev: float    # max |inclusion_freq - (l+1)/n|
    girth_ok: bool              # girth > length, so the exact law applies


def walk_visit_stats(g: RegularGraph, length: int, trials: int,
                     rng: np.random.Generator) -> VisitStats:
    """Estimate P[v = u_i] (exactly 1/n per position) and P[v in walk]
    (exactly (l+1)/n when girth > length; otherwise flagged, estimates still
    produced against the same reference values)."""
    walks = sample_walks(g, length, trials, rng)
    n = g.n
    pos_freq = np.empty((n, length + 1), dtype=np.float64)
    for i in range(length + 1):
        pos_freq[:, i] = np.bincount(walks[:, i], minlength=n) / trials
    # count walks containing v once each, even if v repeats within a walk
    sorted_rows = np.sort(walks, axis=1)
    dedup = sorted_rows[:, 1:] != sorted_rows[:, :-1]
    first = np.ones((trials, 1), dtype=bool)
    keep = np.concatenate([first, dedup], axis=1)
    incl = np.bincount(sorted_rows[keep], minlength=n)
    incl_freq = incl / trials
    girth_ok = girth(g) > length
    return VisitStats(
        trials=trials,
        position_freq=pos_freq,
        inclusion_freq=incl_freq,
        max_position_dev=float(np.abs(pos_freq - 1.0 / n).max()),
        max_inclusion_dev=float(np.abs(incl_freq - (length + 1) / n).max()),
        girth_ok=girth_ok,
    )
