"""d-regular graphs: construction, fixtures, girth, and girth-hypothesis checks.

Nodes are dense integers 0..n-1 and adjacency is an (n, d) int32 array with
sorted rows, so load vectors and walk steps are plain array lookups. Graphs
are immutable after construction and safe to share across workers.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from . import _cycles
from .rng import make_rng

NO_CYCLE = _cycles.NO_CYCLE  # forest sentinel; unreachable for d >= 2


class GraphError(Exception):
    """Invalid graph input or construction request."""


class InfeasibleGraphError(GraphError):
    """The requested (n, d, girth) combination cannot exist."""


class GirthRepairError(GraphError):
    """Girth repair ran out of budget; carries the best girth achieved."""

    def __init__(self, message: str, achieved_girth: int):
        super().__init__(message)
        self.achieved_girth = achieved_girth


class RegularGraph:
    """Immutable simple d-regular graph with cached girth.

    adjacency rows are sorted and the array is write-protected; `rows` is a
    lazily built list-of-lists view used by the scalar walk sampler.
    """

    def __init__(self, adjacency: np.ndarray, girth_cache: int | None = None,
                 validate: bool = True):
        adjacency = np.ascontiguousarray(adjacency, dtype=np.int32)
        if adjacency.ndim != 2:
            raise GraphError("adjacency must be an (n, d) array")
        self.n = int(adjacency.shape[0])
        self.d = int(adjacency.shape[1])
        self.adjacency = adjacency
        self.adjacency.setflags(write=False)
        self.girth_cache = girth_cache
        self._rows: list[list[int]] | None = None
        if validate:
            self._validate()

    def _validate(self) -> None:
        n, d, adj = self.n, self.d, self.adjacency
        if d < 2:
            raise GraphError(f"degree must be >= 2, got {d}")
        if n * d % 2 != 0:
            raise GraphError(f"n*d must be even, got n={n}, d={d}")
        if adj.min() < 0 or adj.max() >= n:
            raise GraphError("neighbor id out of range")
        if np.any(adj == np.arange(n, dtype=np.int32)[:, None]):
            raise GraphError("self-loop found")
        if np.any(np.diff(adj, axis=1) <= 0):
            raise GraphError("adjacency rows must be sorted and duplicate-free")
        # symmetry: the multiset of directed edges must equal its reverse
        u = np.repeat(np.arange(n, dtype=np.int32), d)
        v = adj.ravel()
        fwd = np.sort(u.astype(np.int64) * n + v)
        rev = np.sort(v.astype(np.int64) * n + u)
        if not np.array_equal(fwd, rev):
            raise GraphError("adjacency is not symmetric")

    @property
    def rows(self) -> list[list[int]]:
        if self._rows is None:
            self._rows = [row.tolist() for row in self.adjacency]
        return self._rows

    def neighbors(self, u: int) -> np.ndarray:
        return self.adjacency[u]

    def edge_count(self) -> int:
        return self.n * self.d // 2

    def has_edge(self, u: int, v: int) -> bool:
        row = self.adjacency[u]
        i = int(np.searchsorted(row, v))
        return i < self.d and int(row[i]) == v

    def edges(self) -> Iterable[tuple[int, int]]:
        for u in range(self.n):
            for v in self.adjacency[u]:
                if u < v:
                    yield u, int(v)

    def __repr__(self) -> str:
        g = f", girth={self.girth_cache}" if self.girth_cache is not None else ""
        return f"RegularGraph(n={self.n}, d={self.d}{g})"


@dataclass(frozen=True)
class GraphSpec:
    """How to obtain a graph: generate, pick a fixture, or read a file."""

    kind: str  # random-regular | fixture | file
    n: int = 0
    d: int = 0
    min_girth: int | None = None
    seed: int = 0
    fixture_name: str | None = None
    path: str | None = None

    def __post_init__(self):
        if self.kind not in ("random-regular", "fixture", "file"):
            raise GraphError(f"unknown graph kind {self.kind!r}")
        if self.min_girth is not None and self.min_girth < 3:
            raise GraphError("min_girth must be >= 3")


def girth(g: RegularGraph) -> int:
    """Length of the shortest cycle (cached on the graph)."""
    if g.girth_cache is None:
        g.girth_cache = int(_cycles.girth_scan(g.adjacency.ravel(), g.n, g.d))
    return g.girth_cache


def moore_lower_bound(d: int, target_girth: int) -> int:
    """Smallest n for which a d-regular graph of the given girth can exist."""
    if target_girth % 2 == 1:
        r = (target_girth - 1) // 2
        total = 1 + d * sum((d - 1) ** i for i in range(r))
    else:
        r = target_girth // 2
        total = 2 * sum((d - 1) ** i for i in range(r))
    return total


def _pairing_edges(n: int, d: int, rng) -> list[tuple[int, int]]:
    """Configuration-model pairing; offending pairs (loops/multi-edges) are
    re-paired against random partners until the multigraph is simple."""
    stubs = np.repeat(np.arange(n, dtype=np.int64), d)
    rng.shuffle(stubs)
    pairs: list[tuple[int, int]] = [
        (int(a), int(b)) if a <= b else (int(b), int(a))
        for a, b in stubs.reshape(-1, 2)
    ]
    seen: set[tuple[int, int]] = set()
    bad: list[int] = []
    for i, p in enumerate(pairs):
        if p[0] == p[1] or p in seen:
            bad.append(i)
        else:
            seen.add(p)
    attempts = 0
    limit = 200 * len(pairs) + 10_000
    while bad:
        attempts += 1
        if attempts > limit:
            raise GraphError("pairing cleanup did not converge")
        i = bad.pop()
        j = int(rng.integers(len(pairs)))
        if i == j:
            bad.append(i)
            continue
        a, b = pairs[i]
        c, e = pairs[j]
        pj = pairs[j]
        cand1 = (a, c) if a <= c else (c, a)
        cand2 = (b, e) if b <= e else (e, b)
        if (pj in seen and cand1[0] != cand1[1] and cand2[0] != cand2[1]
                and cand1 != cand2 and cand1 not in seen and cand2 not in seen):
            seen.discard(pj)
            pairs[i], pairs[j] = cand1, cand2
            seen.add(cand1)
            seen.add(cand2)
        else:
            bad.append(i)
    return pairs


def _edges_to_adjacency(n: int, d: int, pairs: Iterable[tuple[int, int]]) -> np.ndarray:
    adj = np.full((n, d), -1, dtype=np.int32)
    fill = np.zeros(n, dtype=np.int32)
    for a, b in pairs:
        adj[a, fill[a]] = b
        fill[a] += 1
        adj[b, fill[b]] = a
        fill[b] += 1
    if not np.all(fill == d):
        raise GraphError("edge list is not d-regular")
    adj.sort(axis=1)
    return adj


def _replace_neighbor(flat: np.ndarray, d: int, u: int, old: int, new: int) -> None:
    base = u * d
    for i in range(base, base + d):
        if flat[i] == old:
            flat[i] = new
            return
    raise GraphError("edge bookkeeping corrupted during repair")


def _apply_swap(flat, d, u, v, x, y) -> None:
    # (u,v),(x,y) -> (u,x),(v,y)
    _replace_neighbor(flat, d, u, v, x)
    _replace_neighbor(flat, d, v, u, y)
    _replace_neighbor(flat, d, x, y, u)
    _replace_neighbor(flat, d, y, x, v)


def _revert_swap(flat, d, u, v, x, y) -> None:
    _replace_neighbor(flat, d, u, x, v)
    _replace_neighbor(flat, d, v, y, u)
    _replace_neighbor(flat, d, x, u, y)
    _replace_neighbor(flat, d, y, v, x)


def _repair_girth(flat: np.ndarray, n: int, d: int, target: int, rng,
                  budget: int) -> None:
    """Double-edge swaps until no cycle shorter than target remains.

    Each fix removes one edge of a detected short cycle and rewires it against
    a partner edge both of whose new endpoints lie at distance >= target-1, so
    a successful swap never introduces a new short cycle (verified post-swap,
    reverting if the capped check disagrees). Raises GirthRepairError when the
    swap budget runs out.
    """
    dist = np.full(n, -1, np.int32)
    par = np.empty(n, np.int32)
    q = np.empty(n, np.int64)
    du = np.empty(n, np.int32)
    dv = np.empty(n, np.int32)
    db = np.empty(n, np.int32)
    start = 0
    stalls = 0
    while True:
        root, x, w = _cycles.find_short_cycle(flat, n, d, target, start, dist, par, q)
        if root < 0:
            return
        # extract the short cycle through (x, w) by walking parents to the LCA
        up_x = []
        a = int(x)
        while a >= 0:
            up_x.append(a)
            a = int(par[a])
        on_x = set(up_x)
        up_w = []
        a = int(w)
        while a not in on_x:
            up_w.append(a)
            a = int(par[a])
        cyc = up_x[:up_x.index(a) + 1] + up_w[::-1]
        dist[:] = -1
        m = len(cyc)
        edges = [(cyc[i], cyc[(i + 1) % m]) for i in range(m)]
        order = rng.permutation(m)
        fixed = False
        for ei in order:
            u, v = edges[int(ei)]
            _cycles.bfs_capped(flat, n, d, u, target - 2, du)
            far_u = np.flatnonzero(du == -1)
            if far_u.size == 0:
                continue
            _cycles.bfs_capped(flat, n, d, v, target - 2, dv)
            for _ in range(30):
                if budget <= 0:
                    raise GirthRepairError(
                        f"girth repair budget exhausted (best girth "
                        f"{_cycles.girth_scan(flat, n, d)} < {target})",
                        achieved_girth=int(_cycles.girth_scan(flat, n, d)))
                xx = int(far_u[rng.integers(far_u.size)])
                row = flat[xx * d:(xx + 1) * d]
                ys = [int(y) for y in row if dv[y] == -1]
                if not ys:
                    continue
                yy = ys[int(rng.integers(len(ys)))]
                budget -= 1
                _apply_swap(flat, d, u, v, xx, yy)
                ok = (_cycles.detour_longer_than(flat, n, d, u, xx, target - 2, db)
                      and _cycles.detour_longer_than(flat, n, d, v, yy, target - 2, db))
                if ok:
                    fixed = True
                    break
                _revert_swap(flat, d, u, v, xx, yy)
            if fixed:
                break
        if fixed:
            start = root
            stalls = 0
        else:
            start = root + 1
            stalls += 1
            if stalls > n:
                raise GirthRepairError(
                    f"girth repair stalled (best girth "
                    f"{_cycles.girth_scan(flat, n, d)} < {target})",
                    achieved_girth=int(_cycles.girth_scan(flat, n, d)))


def generate_random_regular(spec: GraphSpec) -> RegularGraph:
    """Random simple d-regular graph via the pairing model, optionally repaired
    to a minimum girth by cycle-destroying double-edge swaps.

    Deterministic for a fixed spec (including seed). Swap budget is 100*n*d.
    """
    n, d = spec.n, spec.d
    if n * d % 2 != 0:
        raise InfeasibleGraphError(f"n*d must be even, got n={n}, d={d}")
    if d >= n:
        raise InfeasibleGraphError(f"degree {d} must be < n={n}")
    if d < 2:
        raise InfeasibleGraphError("degree must be >= 2")
    rng = make_rng(spec.seed)
    pairs = _pairing_edges(n, d, rng)
    adj = _edges_to_adjacency(n, d, pairs)
    if spec.min_girth is not None and spec.min_girth > 3:
        need = moore_lower_bound(d, spec.min_girth)
        if n < need:
            raise InfeasibleGraphError(
                f"no {d}-regular graph of girth {spec.min_girth} on {n} nodes "
                f"(needs n >= {need})")
        flat = adj.ravel().copy()
        _repair_girth(flat, n, d, spec.min_girth, rng, budget=100 * n * d)
        adj = flat.reshape(n, d)
        adj.sort(axis=1)
    g = RegularGraph(adj)
    if spec.min_girth is not None:
        got = girth(g)
        if got < spec.min_girth:
            raise GirthRepairError(
                f"girth repair finished below target ({got} < {spec.min_girth})",
                achieved_girth=got)
    return g


# ---------------------------------------------------------------------------
# Fixture catalog. Small cages ship with known girth so the exact enumeration
# oracles have room to work with girth > walk length at tiny n.
# ---------------------------------------------------------------------------

def _cycle_graph(n: int) -> np.ndarray:
    if n < 3:
        raise GraphError("cycle needs n >= 3")
    idx = np.arange(n)
    adj = np.stack([(idx - 1) % n, (idx + 1) % n], axis=1)
    adj.sort(axis=1)
    return adj


def _complete_graph(n: int) -> np.ndarray:
    if n < 3:
        raise GraphError("complete graph needs n >= 3")
    adj = np.empty((n, n - 1), dtype=np.int32)
    for u in range(n):
        adj[u] = [v for v in range(n) if v != u]
    return adj


def _lcf_graph(n: int, pattern: list[int]) -> np.ndarray:
    """Hamiltonian ring 0..n-1 plus chords i -> i + pattern[i % len]."""
    edges = set()
    for i in range(n):
        edges.add(tuple(sorted((i, (i + 1) % n))))
        edges.add(tuple(sorted((i, (i + pattern[i % len(pattern)]) % n))))
    return _edges_to_adjacency(n, 3, sorted(edges))


def _petersen() -> np.ndarray:
    edges = []
    for i in range(5):
        edges.append((i, (i + 1) % 5))          # outer 5-cycle
        edges.append((5 + i, 5 + (i + 2) % 5))  # inner pentagram
        edges.append((i, 5 + i))                # spokes
    return _edges_to_adjacency(10, 3, edges)


_FIXTURES: dict[str, tuple[Callable[[], np.ndarray], int]] = {
    "petersen": (_petersen, 5),
    "heawood": (lambda: _lcf_graph(14, [5, -5]), 6),
    "k4": (lambda: _complete_graph(4), 3),
    "mcgee": (lambda: _lcf_graph(24, [12, 7, -7]), 7),
    "tutte-coxeter": (lambda: _lcf_graph(30, [-13, -9, 7, -7, 9, 13]), 8),
    "foster": (lambda: _lcf_graph(90, [17, -9, 37, -37, 9, -17]), 10),
}

_PARAM_FIXTURE = re.compile(r"^(cycle|complete)\((\d+)\)$")


def fixture_names() -> list[str]:
    return sorted(_FIXTURES) + ["cycle(N)", "complete(N)"]


def load_fixture(name: str) -> RegularGraph:
    """Named graph from the built-in catalog; ships with its known girth."""
    key = name.strip().lower()
    if key in _FIXTURES:
        build, known_girth = _FIXTURES[key]
        return RegularGraph(build(), girth_cache=known_girth)
    m = _PARAM_FIXTURE.match(key)
    if m:
        n = int(m.group(2))
        if m.group(1) == "cycle":
            return RegularGraph(_cycle_graph(n), girth_cache=n)
        return RegularGraph(_complete_graph(n), girth_cache=3)
    raise GraphError(f"unknown fixture {name!r} (catalog: {', '.join(fixture_names())})")


# ---------------------------------------------------------------------------
# Plain-text edge-list format: first line "n d", then one "u v" per line,
# 0-indexed, each undirected edge once.
# ---------------------------------------------------------------------------

def save_graph(g: RegularGraph, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{g.n} {g.d}\n")
        for u, v in g.edges():
            fh.write(f"{u} {v}\n")


def load_graph(path: str | Path) -> RegularGraph:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise GraphError("first line must be 'n d'")
        n, d = int(header[0]), int(header[1])
        pairs = []
        for ln, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise GraphError(f"line {ln}: expected 'u v'")
            pairs.append((int(parts[0]), int(parts[1])))
    if len(pairs) != n * d // 2:
        raise GraphError(f"expected {n * d // 2} edges, found {len(pairs)}")
    return RegularGraph(_edges_to_adjacency(n, d, pairs))


def build_graph(spec: GraphSpec) -> RegularGraph:
    if spec.kind == "random-regular":
        return generate_random_regular(spec)
    if spec.kind == "fixture":
        if not spec.fixture_name:
            raise GraphError("fixture kind needs fixture_name")
        return load_fixture(spec.fixture_name)
    if not spec.path:
        raise GraphError("file kind needs path")
    return load_graph(spec.path)


# ---------------------------------------------------------------------------
# Girth-hypothesis report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GirthReport:
    """How the graph's girth relates to the analysis hypotheses.

    Never blocks a simulation; `hypothesis_ok` gates only the validity of the
    theory-side guarantees, `walk_simplicity_ok` says whether sampled walks
    are guaranteed to be simple paths. Alternative thresholds that appear in
    different statements of the girth requirement are reported alongside.
    """

    girth: int
    mode: str
    required: float
    hypothesis_ok: bool
    walk_span: int
    walk_simplicity_ok: bool
    alternatives: dict = field(default_factory=dict)


def check_girth_condition(g: RegularGraph, p, mode: str = "dense") -> GirthReport:
    """Compare girth(g) against 10*h*l (dense) or 10*h*l*r_G (sparse)."""
    import math

    got = girth(g)
    span = p.l * (p.r_g if mode == "sparse" else 1)
    required = 10.0 * p.h * p.l * (p.r_g if mode == "sparse" else 1)
    loglog = math.log(math.log(p.n)) if p.n > 3 else float("nan")
    alternatives = {
        "10_l_loglog_n": 10.0 * p.l * loglog,
        "10_l_loglog_n_sq": 10.0 * p.l * loglog ** 2,
    }
    return GirthReport(
        girth=got,
        mode=mode,
        required=required,
        hypothesis_ok=got >= required,
        walk_span=span,
        walk_simplicity_ok=got > span,
        alternatives=alternatives,
    )
