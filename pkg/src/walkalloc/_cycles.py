"""Compiled BFS kernels for cycle detection on regular graphs.

All kernels operate on the flattened adjacency of a d-regular graph
(int32 array of length n*d, row u occupying [u*d, (u+1)*d)). They are
internal; graphs.py wraps them.
"""
from __future__ import annotations

import numpy as np
from numba import njit

NO_CYCLE = 1 << 30


@njit(cache=True)
def girth_scan(adj, n, d):
    """Exact girth via per-root truncated BFS; NO_CYCLE if the graph is a forest.

    For each root, the first non-tree edge (x, w) seen at depth dx yields a
    closed walk of length dx + dist[w] + 1 which always contains a cycle of at
    most that length, so candidates never undershoot the girth; a root lying on
    a shortest cycle attains it exactly.
    """
    best = NO_CYCLE
    dist = np.full(n, -1, np.int32)
    par = np.empty(n, np.int32)
    q = np.empty(n, np.int64)
    for root in range(n):
        if best == 3:
            break
        touched = [np.int64(root)]
        dist[root] = 0
        par[root] = -1
        q[0] = root
        head, tail = 0, 1
        while head < tail:
            x = q[head]
            head += 1
            dx = dist[x]
            if 2 * dx + 1 >= best:
                break
            base = x * d
            for i in range(d):
                w = adj[base + i]
                if dist[w] == -1:
                    dist[w] = dx + 1
                    par[w] = x
                    q[tail] = w
                    tail += 1
                    touched.append(np.int64(w))
                elif w != par[x]:
                    c = dx + dist[w] + 1
                    if c < best:
                        best = c
        for t in touched:
            dist[t] = -1
    return best


@njit(cache=True)
def find_short_cycle(adj, n, d, limit, start, dist, par, q):
    """First root (scanning from `start`, wrapping) whose BFS exposes a cycle
    shorter than `limit`; returns (root, x, w) for the offending non-tree edge,
    or (-1, -1, -1). On a hit, dist/par retain that root's BFS tree so the
    caller can extract the cycle; on a miss they are reset.
    """
    for r0 in range(n):
        root = (start + r0) % n
        touched = [np.int64(root)]
        dist[root] = 0
        par[root] = -1
        q[0] = root
        head, tail = 0, 1
        hit_x = np.int64(-1)
        hit_w = np.int64(-1)
        while head < tail and hit_x < 0:
            x = q[head]
            head += 1
            dx = dist[x]
            if 2 * dx + 1 >= limit:
                break
            base = x * d
            for i in range(d):
                w = adj[base + i]
                if dist[w] == -1:
                    dist[w] = dx + 1
                    par[w] = x
                    q[tail] = w
                    tail += 1
                    touched.append(np.int64(w))
                elif w != par[x]:
                    if dx + dist[w] + 1 < limit:
                        hit_x = x
                        hit_w = np.int64(w)
                        break
        if hit_x >= 0:
            return root, hit_x, hit_w
        for t in touched:
            dist[t] = -1
    return -1, np.int64(-1), np.int64(-1)


@njit(cache=True)
def bfs_capped(adj, n, d, src, cap, dist):
    """Distances from src up to depth cap; unreached nodes stay -1."""
    dist[:] = -1
    q = np.empty(n, np.int64)
    dist[src] = 0
    q[0] = src
    head, tail = 0, 1
    while head < tail:
        x = q[head]
        head += 1
        dx = dist[x]
        if dx >= cap:
            continue
        base = x * d
        for i in range(d):
            w = adj[base + i]
            if dist[w] == -1:
                dist[w] = dx + 1
                q[tail] = w
                tail += 1


@njit(cache=True)
def detour_longer_than(adj, n, d, a, b, cap, dist):
    """True iff every a-b path avoiding the direct edge (a, b) is longer than cap.

    Equivalently: the shortest cycle through edge (a, b) exceeds cap + 1.
    """
    dist[:] = -1
    q = np.empty(n, np.int64)
    dist[a] = 0
    q[0] = a
    head, tail = 0, 1
    while head < tail:
        x = q[head]
        head += 1
        dx = dist[x]
        if dx >= cap:
            continue
        base = x * d
        for i in range(d):
            w = adj[base + i]
            if x == a and w == b:
                continue
            if dist[w] == -1:
                if w == b:
                    return False
                dist[w] = dx + 1
                q[tail] = w
                tail += 1
    return True
