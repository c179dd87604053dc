"""Witness-tree construction over a finished trace.

Given a node whose load clears h*rho + c + 1, the builder tries to certify it
by a leveled tree of chosen walks: the root is the walk of the ball sitting at
height h*rho + c on that node; each tree edge comes from a partition-and-branch
step that finds another chosen walk meeting an intersection condition (its
overlap with the parent walk is confined to one subpath's interior) and a load
condition (its least-loaded node is within rho of the parent's). The verifier
rechecks every structural claim independently and is the consumer of the
serialized form.

The probability analysis that motivates this construction is not executable;
this module only builds and checks concrete trees, and the builder is
best-effort: where the girth or schedule hypotheses are marginal it simply
reports where and why it got stuck.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .allocation import AllocationTrace
from .graphs import RegularGraph
from .params import DerivedParams


@dataclass(frozen=True)
class SubpathPartition:
    """k edge-disjoint subpaths covering a walk, lengths floor(l/k) or
    ceil(l/k), with all longer pieces laid out first (deterministic, so traces
    replay identically)."""

    walk: tuple[int, ...]
    cut_indices: tuple[int, ...]

    @property
    def cut_nodes(self) -> tuple[int, ...]:
        return tuple(self.walk[i] for i in self.cut_indices)

    @property
    def intervals(self) -> list[tuple[int, int]]:
        return list(zip(self.cut_indices[:-1], self.cut_indices[1:]))

    def nodes_of(self, interval: tuple[int, int]) -> tuple[int, ...]:
        return self.walk[interval[0]:interval[1] + 1]


def partition(walk, k: int) -> SubpathPartition:
    """Cut a walk into k pieces; remainder pieces of length ceil(l/k) first."""
    nodes = tuple(walk.nodes) if hasattr(walk, "nodes") else tuple(walk)
    length = len(nodes) - 1
    if k < 4:
        raise ValueError("k must be >= 4")
    if length < k:
        raise ValueError(f"walk length {length} shorter than k={k}")
    short, extra = divmod(length, k)
    cuts = [0]
    for i in range(k):
        cuts.append(cuts[-1] + (short + 1 if i < extra else short))
    return SubpathPartition(walk=nodes, cut_indices=tuple(cuts))


@dataclass(frozen=True)
class WitnessNode:
    ball: int
    walk: tuple[int, ...]
    parent: int | None                  # ball index of the father walk
    subpath: tuple[int, int] | None     # interval in the father's walk


@dataclass
class WitnessTree:
    k: int
    h: int
    rho: int
    c: int
    root: WitnessNode
    levels: list[list[WitnessNode]]
    lam: int   # tree size; serialized as "lambda"
    mu: int    # size of the union of all walk node sets

    def all_nodes(self) -> list[WitnessNode]:
        out = [self.root]
        for lv in self.levels:
            out.extend(lv)
        return out

    def walk_span(self) -> int:
        return len(self.root.walk) - 1


@dataclass(frozen=True)
class WitnessFailure:
    reason: str
    level: int | None = None
    ball: int | None = None
    subpath: tuple[int, int] | None = None
    detail: str | None = None


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str


@dataclass(frozen=True)
class VerifyResult:
    ok: bool
    violations: list[Violation]

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}


def min_load_over(walk, loads) -> int:
    """f(W): the number of balls on a least-loaded node of the walk."""
    return min(loads[v] for v in set(walk))


def _interior(nodes: tuple[int, ...]) -> set[int]:
    return set(nodes[1:-1])


def branch(trace: AllocationTrace, parent_walk, subpath: tuple[int, int],
           rho: int, *, exclude=frozenset(), loads=None,
           middle_margin: int | None = None) -> int | None:
    """First ball (ascending index) whose walk intersects the parent only
    inside the given subpath's interior and whose least-loaded node is within
    rho of the parent's; None when no candidate exists.

    Candidates are pre-filtered to balls placed on the scanned nodes at height
    >= f(parent) - rho. middle_margin restricts the scan to the subpath's
    middle segment (margin nodes trimmed from both ends); the intersection
    condition itself is always checked against the full interior.
    """
    parent_nodes = (tuple(parent_walk.nodes) if hasattr(parent_walk, "nodes")
                    else tuple(parent_walk))
    if loads is None:
        loads = trace.loads
    f_parent = min_load_over(parent_nodes, loads)
    return _branch_scan(trace, parent_nodes, subpath, rho, f_parent, loads,
                        exclude=set(exclude), forbidden=(),
                        middle_margin=middle_margin)


def _branch_scan(trace, parent_nodes, subpath, rho, f_parent, loads, *,
                 exclude, forbidden, middle_margin) -> int | None:
    i0, i1 = subpath
    sub_nodes = parent_nodes[i0:i1 + 1]
    interior = _interior(sub_nodes)
    if not interior:
        return None
    if middle_margin:
        scan = set(parent_nodes[i0 + middle_margin:i1 - middle_margin + 1])
    else:
        scan = interior
    parent_set = set(parent_nodes)
    floor_height = f_parent - rho
    for rec in trace.balls:
        if rec.t in exclude or rec.chosen not in scan:
            continue
        if rec.height < floor_height or rec.walk is None:
            continue
        wset = set(rec.walk)
        inter = wset & parent_set
        if not inter or not inter <= interior:
            continue  # (C1)
        if min_load_over(rec.walk, loads) < floor_height:
            continue  # (C2)
        if any(wset & other for other in forbidden):
            continue  # keep single-intersection structure buildable
        return rec.t
    return None


def build_witness(trace: AllocationTrace, g: RegularGraph, start_node: int,
                  params: DerivedParams, c: int, *,
                  middle_only: bool = False,
                  at_ball: int | None = None) -> WitnessTree | WitnessFailure:
    """Try to grow the full (k, h) tree rooted at start_node's high ball.

    Level 1 branches all k subpaths of the root walk; deeper levels branch the
    first k-2 subpaths that avoid the grandfather walk. Selected walks must
    stay node-disjoint from everything but their father, so a returned tree
    always passes verify_witness_tree (checked before returning). Failures
    name the level, walk, and subpath that got stuck.
    """
    if params.degenerate or params.rho is None:
        return WitnessFailure(reason="degenerate-params",
                              detail="delta is 0; rho unavailable")
    if trace.light:
        return WitnessFailure(reason="light-trace")
    k, h, rho = params.k, params.h, params.rho
    if at_ball is not None:
        loads = [0] * trace.n
        records = trace.balls[:at_ball]
        for rec in records:
            loads[rec.chosen] += 1
        trace = AllocationTrace(n=trace.n, d=trace.d, strategy=trace.strategy,
                                seed=trace.seed, loads=loads, balls=records,
                                params=trace.params)
    loads = trace.loads
    threshold = h * rho + c + 1
    if loads[start_node] < threshold:
        return WitnessFailure(
            reason="threshold-not-met",
            detail=f"load {loads[start_node]} < {threshold} at node {start_node}")
    root_rec = next((r for r in trace.balls
                     if r.chosen == start_node and r.height == h * rho + c), None)
    if root_rec is None or root_rec.walk is None:
        return WitnessFailure(reason="root-walk-missing",
                              detail=f"no recorded ball at height {h * rho + c}")
    if len(root_rec.walk) - 1 < k:
        return WitnessFailure(reason="walk-too-short",
                              detail=f"walk length {len(root_rec.walk) - 1} < k={k}")
    margin = params.delta if middle_only else None
    root = WitnessNode(ball=root_rec.t, walk=tuple(root_rec.walk), parent=None,
                       subpath=None)
    by_ball = {root.ball: root}
    selected_sets = {root.ball: set(root.walk)}
    used: set[int] = {root.ball}
    levels: list[list[WitnessNode]] = []
    prev = [root]
    for level_i in range(1, h + 1):
        cur: list[WitnessNode] = []
        for parent_node in prev:
            part = partition(parent_node.walk, k)
            if level_i == 1:
                chosen_ivs = part.intervals
            else:
                grandfather = by_ball[parent_node.parent]
                gf_set = set(grandfather.walk)
                free = [iv for iv in part.intervals
                        if not (set(part.nodes_of(iv)) & gf_set)]
                if len(free) < k - 2:
                    return WitnessFailure(
                        reason="insufficient-free-subpaths", level=level_i,
                        ball=parent_node.ball,
                        detail=f"{len(free)} free subpaths < k-2={k - 2}")
                chosen_ivs = free[:k - 2]
            f_parent = min_load_over(parent_node.walk, loads)
            for iv in chosen_ivs:
                forbidden = [s for b, s in selected_sets.items()
                             if b != parent_node.ball]
                cand = _branch_scan(trace, parent_node.walk, iv, rho, f_parent,
                                    loads, exclude=used, forbidden=forbidden,
                                    middle_margin=margin)
                if cand is None:
                    return WitnessFailure(reason="no-branch-candidate",
                                          level=level_i, ball=parent_node.ball,
                                          subpath=iv)
                rec = trace.balls[cand]
                node = WitnessNode(ball=rec.t, walk=tuple(rec.walk),
                                   parent=parent_node.ball, subpath=iv)
                cur.append(node)
                by_ball[node.ball] = node
                selected_sets[node.ball] = set(node.walk)
                used.add(node.ball)
        levels.append(cur)
        prev = cur
    lam = 1 + sum(len(lv) for lv in levels)
    union: set[int] = set()
    for s in selected_sets.values():
        union |= s
    tree = WitnessTree(k=k, h=h, rho=rho, c=c, root=root, levels=levels,
                       lam=lam, mu=len(union))
    res = verify_witness_tree(tree, trace, g)
    if not res.ok:
        return WitnessFailure(
            reason="verify-failed",
            detail="; ".join(f"{v.kind}: {v.detail}" for v in res.violations))
    return tree


def verify_witness_tree(tree: WitnessTree, trace: AllocationTrace,
                        g: RegularGraph, c: int | None = None) -> VerifyResult:
    """Independent recheck of a claimed tree; returns all violations found.

    Checks: ball records match the trace; level sizes k(k-2)^(j-1) over h
    levels; walks within a level pairwise disjoint; each walk meets exactly
    its father among earlier walks; the intersection sits inside the declared
    partition subpath's interior (C1) and the load drop is at most rho (C2);
    the graphical union of every level prefix is a tree; the size fields and
    the c-loadedness of the union hold against the trace's final loads.
    """
    v: list[Violation] = []
    if c is None:
        c = tree.c
    k, h = tree.k, tree.h

    def check_record(node: WitnessNode):
        if node.ball < 0 or node.ball >= len(trace.balls):
            v.append(Violation("trace-mismatch", f"ball {node.ball} not in trace"))
            return
        rec = trace.balls[node.ball]
        if rec.walk is None or tuple(rec.walk) != tuple(node.walk):
            v.append(Violation("trace-mismatch",
                               f"ball {node.ball} walk differs from trace"))

    for node in tree.all_nodes():
        check_record(node)

    if len(tree.levels) != h:
        v.append(Violation("level-count",
                           f"{len(tree.levels)} levels, expected h={h}"))
    for j, lv in enumerate(tree.levels, start=1):
        expect = k * (k - 2) ** (j - 1)
        if len(lv) != expect:
            v.append(Violation("level-count",
                               f"level {j} has {len(lv)} walks, expected {expect}"))

    by_ball = {tree.root.ball: tree.root}
    sets = {tree.root.ball: set(tree.root.walk)}
    earlier = [tree.root]
    seen_edges: set[tuple[int, tuple[int, int]]] = set()
    for j, lv in enumerate(tree.levels, start=1):
        for a_i in range(len(lv)):
            for b_i in range(a_i + 1, len(lv)):
                if set(lv[a_i].walk) & set(lv[b_i].walk):
                    v.append(Violation(
                        "disjointness",
                        f"level {j}: walks of balls {lv[a_i].ball} and "
                        f"{lv[b_i].ball} share a node"))
        for node in lv:
            wset = set(node.walk)
            if node.parent not in by_ball:
                v.append(Violation("parent-intersection",
                                   f"ball {node.ball}: parent {node.parent} is "
                                   f"not in an earlier level"))
                continue
            father = by_ball[node.parent]
            for other in earlier:
                inter = wset & sets[other.ball]
                if other.ball == node.parent:
                    if not inter:
                        v.append(Violation(
                            "parent-intersection",
                            f"ball {node.ball} does not meet its father"))
                elif inter:
                    v.append(Violation(
                        "parent-intersection",
                        f"ball {node.ball} meets non-father ball {other.ball}"))
            if node.subpath is None:
                v.append(Violation("subpath", f"ball {node.ball}: no subpath"))
            else:
                try:
                    part = partition(father.walk, k)
                except ValueError as exc:
                    v.append(Violation("subpath", str(exc)))
                    part = None
                if part is not None:
                    iv = tuple(node.subpath)
                    if iv not in part.intervals:
                        v.append(Violation(
                            "subpath",
                            f"ball {node.ball}: {iv} is not a partition piece"))
                    elif (node.parent, iv) in seen_edges:
                        v.append(Violation(
                            "subpath",
                            f"ball {node.ball}: subpath {iv} of ball "
                            f"{node.parent} branched twice"))
                    else:
                        seen_edges.add((node.parent, iv))
                        interior = _interior(part.nodes_of(iv))
                        inter = wset & sets[father.ball]
                        if not inter or not inter <= interior:
                            v.append(Violation(
                                "c1",
                                f"ball {node.ball}: intersection with father "
                                f"not confined to subpath interior"))
            f_child = min_load_over(node.walk, trace.loads)
            f_parent = min_load_over(father.walk, trace.loads)
            if f_child < f_parent - tree.rho:
                v.append(Violation(
                    "c2", f"ball {node.ball}: f={f_child} < "
                          f"f(father)-rho={f_parent - tree.rho}"))
        for node in lv:
            by_ball[node.ball] = node
            sets[node.ball] = set(node.walk)
            earlier.append(node)

    prefix: list[WitnessNode] = [tree.root]
    for j, lv in enumerate(tree.levels, start=1):
        prefix.extend(lv)
        nodes: set[int] = set()
        edges: set[tuple[int, int]] = set()
        for node in prefix:
            nodes.update(node.walk)
            for a, b in zip(node.walk, node.walk[1:]):
                edges.add((a, b) if a < b else (b, a))
        comp = _component_count(nodes, edges)
        if len(edges) > len(nodes) - comp:
            v.append(Violation("acyclicity",
                               f"union through level {j} contains a cycle"))
        if comp > 1:
            v.append(Violation("connectivity",
                               f"union through level {j} is disconnected"))

    expected_lam = 1 + k * sum((k - 2) ** j for j in range(h))
    actual = 1 + sum(len(lv) for lv in tree.levels)
    if tree.lam != expected_lam or actual != expected_lam:
        v.append(Violation("lambda",
                           f"lambda field {tree.lam}, actual {actual}, "
                           f"formula {expected_lam}"))
    union: set[int] = set()
    for node in tree.all_nodes():
        union.update(node.walk)
    span = tree.walk_span()
    mu_bound = (span + 1) * k * (k - 2) ** (h - 1)
    if tree.mu != len(union):
        v.append(Violation("mu", f"mu field {tree.mu} != union size {len(union)}"))
    if len(union) < mu_bound:
        v.append(Violation("mu", f"union size {len(union)} below the "
                                 f"(l+1)k(k-2)^(h-1) = {mu_bound} certificate"))
    low = [u for u in union if trace.loads[u] < c]
    if low:
        v.append(Violation("c-load",
                           f"{len(low)} union nodes below load {c} "
                           f"(e.g. node {low[0]})"))
    return VerifyResult(ok=not v, violations=v)


def _component_count(nodes: set[int], edges: set[tuple[int, int]]) -> int:
    parent = {u: u for u in nodes}

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    comp = len(nodes)
    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            comp -= 1
    return comp


# ---------------------------------------------------------------------------
# JSON form: nested levels with ball indices and subpath intervals; the
# verifier consumes the same structure.
# ---------------------------------------------------------------------------

def tree_to_json(tree: WitnessTree) -> dict:
    return {
        "k": tree.k,
        "h": tree.h,
        "rho": tree.rho,
        "c": tree.c,
        "lambda": tree.lam,
        "mu": tree.mu,
        "root": {"ball": tree.root.ball, "walk": list(tree.root.walk)},
        "levels": [
            [{"ball": n.ball, "walk": list(n.walk), "parent": n.parent,
              "subpath": list(n.subpath) if n.subpath else None}
             for n in lv]
            for lv in tree.levels
        ],
    }


def tree_from_json(obj: dict) -> WitnessTree:
    root = WitnessNode(ball=obj["root"]["ball"],
                       walk=tuple(obj["root"]["walk"]), parent=None,
                       subpath=None)
    levels = [
        [WitnessNode(ball=e["ball"], walk=tuple(e["walk"]), parent=e["parent"],
                     subpath=tuple(e["subpath"]) if e.get("subpath") else None)
         for e in lv]
        for lv in obj["levels"]
    ]
    return WitnessTree(k=obj["k"], h=obj["h"], rho=obj["rho"], c=obj["c"],
                       root=root, levels=levels, lam=obj["lambda"],
                       mu=obj["mu"])


def save_tree(tree: WitnessTree, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(tree_to_json(tree), fh, indent=1)


def load_tree(path: str | Path) -> WitnessTree:
    with open(path, "r", encoding="utf-8") as fh:
        return tree_from_json(json.load(fh))
