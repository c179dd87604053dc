"""Exact enumeration oracles for small fixtures.

Everything here is brute force on purpose: these counts and distributions are
the independent reference the samplers and counting indexes are tested
against. Keep this module free of the fast paths it is meant to check.
"""
from __future__ import annotations

from .graphs import RegularGraph
from .walks import canonical

ENUMERATION_LIMIT = 2_000_000


def ordered_walk_count(n: int, d: int, length: int) -> int:
    """Number of ordered non-backtracking walks of the given length."""
    return n * d * (d - 1) ** (length - 1)


def unordered_walk_count(n: int, d: int, length: int) -> int:
    """Number of walks up to orientation; exact when girth > length (every
    walk is a path, so no walk equals its own reverse)."""
    total = ordered_walk_count(n, d, length)
    if total % 2 != 0:
        raise ValueError("ordered walk count is odd; unordered count undefined")
    return total // 2


def enumerate_walks(g: RegularGraph, length: int) -> list[tuple[int, ...]]:
    """All ordered non-backtracking walks of the given length, in
    lexicographic order of their node sequences."""
    if length < 1:
        raise ValueError("walk length must be >= 1")
    expected = ordered_walk_count(g.n, g.d, length)
    if expected > ENUMERATION_LIMIT:
        raise ValueError(f"enumeration would produce {expected} walks")
    rows = g.rows
    out: list[tuple[int, ...]] = []
    stack: list[tuple[int, ...]] = []
    for u0 in range(g.n):
        for u1 in rows[u0]:
            stack.append((u0, u1))
    # depth-first extension; each frame appends one non-backtracking step
    while stack:
        walk = stack.pop()
        if len(walk) == length + 1:
            out.append(walk)
            continue
        prev, cur = walk[-2], walk[-1]
        for nxt in rows[cur]:
            if nxt != prev:
                stack.append(walk + (nxt,))
    out.sort()
    return out


def enumerate_canonical_walks(g: RegularGraph, length: int) -> set[tuple[int, ...]]:
    """Distinct walks up to orientation."""
    return {canonical(w) for w in enumerate_walks(g, length)}
