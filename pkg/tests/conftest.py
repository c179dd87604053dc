from __future__ import annotations

import pytest

from walkalloc import AllocationTrace, BallRecord, RegularGraph, Strategy, \
    load_fixture


@pytest.fixture(scope="session")
def petersen() -> RegularGraph:
    return load_fixture("petersen")


@pytest.fixture(scope="session")
def heawood() -> RegularGraph:
    return load_fixture("heawood")


@pytest.fixture(scope="session")
def foster() -> RegularGraph:
    return load_fixture("foster")


@pytest.fixture(scope="session")
def k4() -> RegularGraph:
    return load_fixture("k4")


class FakeRng:
    """Scripted stand-in for a numpy Generator: integers() pops preloaded
    responses (arrays included) in order."""

    def __init__(self, responses):
        self.responses = list(responses)

    def integers(self, *args, **kwargs):
        return self.responses.pop(0)


def synth_trace(n: int, d: int, entries, kind: str = "nbrw-dense",
                l: int = 0) -> AllocationTrace:
    """Trace with hand-picked (walk, chosen) balls; heights/loads follow from
    the order. choices are the walk nodes, so chosen must lie on the walk."""
    if l == 0 and entries:
        l = len(entries[0][0]) - 1
    trace = AllocationTrace(n=n, d=d, strategy=Strategy(kind, l=max(1, l)),
                            seed=0)
    for walk, chosen in entries:
        walk = tuple(walk)
        assert chosen in walk
        trace.balls.append(BallRecord(
            t=len(trace.balls), walk=walk, choices=walk, chosen=chosen,
            height=trace.loads[chosen]))
        trace.loads[chosen] += 1
    return trace


def engineered_witness_scenario(foster: RegularGraph):
    """Planted h=1, k=4 witness scenario on the girth-10 fixture.

    The root walk is partitioned into four length-2 subpaths; one ball is
    planted on each subpath interior with a walk that leaves the root path
    immediately, and six balls sit on the root's middle cut node so its top
    ball reaches height h*rho + c = 5.

    Returns (trace, params, root_walk, planted_walks, start_node).
    """
    from dataclasses import replace

    from walkalloc import derive

    g = foster
    root = extend_path(g, 0, g.rows[0][0], 8, forbidden=set())
    assert root is not None
    taken = set(root)
    planted = []
    for idx in (1, 3, 5, 7):
        wi = root[idx]
        off = [x for x in g.rows[wi]
               if x not in (root[idx - 1], root[idx + 1])]
        assert len(off) == 1
        pw = extend_path(g, wi, off[0], 8, forbidden=taken - {wi})
        assert pw is not None
        planted.append(pw)
        taken |= set(pw)
    start = root[4]
    entries = [(pw, pw[0]) for pw in planted]
    entries += [(root, start)] * 6
    trace = synth_trace(g.n, g.d, entries, l=8)
    p = replace(derive(g.n, g.d, 8), k=4, h=1, rho=5, delta=1,
                degenerate=False)
    return trace, p, root, planted, start


def extend_path(g: RegularGraph, start: int, first: int, length: int,
                forbidden: set[int]) -> tuple[int, ...] | None:
    """DFS for a simple path (start, first, ...) of `length` edges avoiding
    `forbidden` after the start node. Used to plant walks in engineered
    traces."""
    path = [start, first]

    def rec() -> bool:
        if len(path) == length + 1:
            return True
        prev, cur = path[-2], path[-1]
        for nxt in g.rows[cur]:
            if nxt == prev or nxt in forbidden or nxt in path:
                continue
            path.append(nxt)
            if rec():
                return True
            path.pop()
        return False

    if first in forbidden or not g.has_edge(start, first):
        return None
    return tuple(path) if rec() else None
