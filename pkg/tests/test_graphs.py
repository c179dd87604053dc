import numpy as np
import pytest

from walkalloc import (GirthRepairError, GraphError, GraphSpec,
                       InfeasibleGraphError, RegularGraph,
                       check_girth_condition, generate_random_regular, girth,
                       load_fixture, load_graph, moore_lower_bound, save_graph)
from walkalloc.params import derive


def enumerate_all_cycles_min(g):
    """Brute-force girth oracle: shortest simple cycle by DFS over all
    start nodes. Only for tiny fixtures."""
    best = None
    rows = g.rows

    def walk(path):
        nonlocal best
        cur = path[-1]
        for nxt in rows[cur]:
            if nxt == path[0] and len(path) >= 3:
                if best is None or len(path) < best:
                    best = len(path)
            elif nxt > path[0] and nxt not in path:
                if best is None or len(path) + 1 < best:
                    walk(path + [nxt])

    for start in range(g.n):
        walk([start])
    return best


def test_petersen_girth_exhaustive(petersen):
    assert enumerate_all_cycles_min(petersen) == 5
    assert girth(petersen) == 5


def test_fixture_girths_match_bfs():
    for name, expected in [("petersen", 5), ("heawood", 6), ("k4", 3),
                           ("mcgee", 7), ("tutte-coxeter", 8), ("foster", 10),
                           ("cycle(12)", 12), ("complete(4)", 3)]:
        g = load_fixture(name)
        assert g.girth_cache == expected
        g.girth_cache = None  # force recompute
        assert girth(g) == expected, name


def test_fixture_shapes():
    cases = {"petersen": (10, 3), "heawood": (14, 3), "k4": (4, 3),
             "mcgee": (24, 3), "tutte-coxeter": (30, 3), "foster": (90, 3),
             "cycle(9)": (9, 2), "complete(6)": (6, 5)}
    for name, (n, d) in cases.items():
        g = load_fixture(name)
        assert (g.n, g.d) == (n, d)
        assert g.edge_count() == n * d // 2


def test_unknown_fixture():
    with pytest.raises(GraphError):
        load_fixture("nonesuch")


def test_regularity_and_symmetry(petersen):
    adj = petersen.adjacency
    for u in range(petersen.n):
        assert len(set(adj[u].tolist())) == 3
        for v in adj[u]:
            assert u in adj[v]


def test_validation_rejects_asymmetry():
    adj = np.array([[1, 2], [0, 2], [0, 3], [1, 2]])  # 3 claims 1, 1 omits 3
    with pytest.raises(GraphError):
        RegularGraph(adj)


def test_validation_rejects_self_loop():
    adj = np.array([[0, 1], [0, 2], [1, 3], [2, 3]])
    with pytest.raises(GraphError):
        RegularGraph(adj)


def test_generate_basic_counts():
    g = generate_random_regular(GraphSpec("random-regular", n=10, d=3, seed=7))
    assert g.n == 10 and g.d == 3
    assert g.edge_count() == 15


def test_generate_odd_product_rejected():
    with pytest.raises(InfeasibleGraphError):
        generate_random_regular(GraphSpec("random-regular", n=7, d=3, seed=1))


def test_generate_degree_too_large():
    with pytest.raises(InfeasibleGraphError):
        generate_random_regular(GraphSpec("random-regular", n=4, d=4, seed=1))


def no_regular_graph_with_girth(n, d, target):
    """Backtracking feasibility search: try to build any d-regular graph on n
    labeled nodes with girth >= target; True means none exists."""
    rows = [set() for _ in range(n)]

    def dist_ok(u, v):
        # adding edge (u,v) must not close a cycle shorter than target
        seen = {u: 0}
        frontier = [u]
        depth = 0
        while frontier and depth < target - 2:
            depth += 1
            nxt = []
            for x in frontier:
                for y in rows[x]:
                    if y not in seen:
                        seen[y] = depth
                        nxt.append(y)
            frontier = nxt
        return v not in seen

    def rec(u):
        if u == n:
            return all(len(r) == d for r in rows)
        if len(rows[u]) == d:
            return rec(u + 1)
        for v in range(u + 1, n):
            if len(rows[v]) < d and v not in rows[u] and dist_ok(u, v):
                rows[u].add(v)
                rows[v].add(u)
                if rec(u):
                    return True
                rows[u].discard(v)
                rows[v].discard(u)
        return False

    return not rec(0)


def test_girth6_on_8_nodes_is_infeasible_oracle():
    # independent confirmation of the Moore-bound rejection below
    assert no_regular_graph_with_girth(8, 3, 6)
    assert moore_lower_bound(3, 6) == 14


def test_generate_infeasible_girth_rejected():
    with pytest.raises(InfeasibleGraphError):
        generate_random_regular(
            GraphSpec("random-regular", n=8, d=3, min_girth=6, seed=3))


def test_generate_with_girth_repair_small():
    g = generate_random_regular(
        GraphSpec("random-regular", n=60, d=3, min_girth=6, seed=11))
    assert girth(g) >= 6
    # still simple and regular (constructor validates); spot-check symmetry
    for u in range(g.n):
        for v in g.adjacency[u]:
            assert u in g.adjacency[v]


def test_repair_budget_exhaustion_reports_girth():
    from walkalloc.graphs import _pairing_edges, _edges_to_adjacency, \
        _repair_girth
    from walkalloc.rng import make_rng
    rng = make_rng(2)
    adj = _edges_to_adjacency(60, 3, _pairing_edges(60, 3, rng))
    with pytest.raises(GirthRepairError) as exc:
        _repair_girth(adj.ravel().copy(), 60, 3, 6, rng, budget=2)
    assert exc.value.achieved_girth >= 3


def test_generate_deterministic():
    spec = GraphSpec("random-regular", n=50, d=4, seed=99, min_girth=4)
    g1 = generate_random_regular(spec)
    g2 = generate_random_regular(spec)
    assert np.array_equal(g1.adjacency, g2.adjacency)


@pytest.mark.parametrize("n,d,seed", [(8, 3, 0), (10, 3, 1), (12, 4, 2),
                                      (9, 4, 3), (12, 3, 4), (14, 3, 5),
                                      (10, 5, 6), (12, 6, 7)])
def test_girth_kernel_matches_bruteforce(n, d, seed):
    g = generate_random_regular(GraphSpec("random-regular", n=n, d=d,
                                          seed=seed))
    expect = enumerate_all_cycles_min(g)
    assert girth(g) == expect


@pytest.mark.parametrize("n,d,seed", [(10, 3, 11), (12, 4, 12), (14, 3, 13)])
def test_short_cycle_scan_consistent_with_girth(n, d, seed):
    import numpy as np
    from walkalloc._cycles import find_short_cycle
    g = generate_random_regular(GraphSpec("random-regular", n=n, d=d,
                                          seed=seed))
    got = girth(g)
    flat = g.adjacency.ravel()
    dist = np.full(n, -1, np.int32)
    par = np.empty(n, np.int32)
    q = np.empty(n, np.int64)
    root, x, w = find_short_cycle(flat, n, d, got, 0, dist, par, q)
    assert root == -1  # nothing shorter than the girth
    dist[:] = -1
    root, x, w = find_short_cycle(flat, n, d, got + 1, 0, dist, par, q)
    assert root >= 0  # a cycle of the girth length is found


def test_save_load_roundtrip(tmp_path, heawood):
    path = tmp_path / "heawood.txt"
    save_graph(heawood, path)
    g = load_graph(path)
    assert np.array_equal(g.adjacency, heawood.adjacency)
    first = path.read_text().splitlines()[0]
    assert first == "14 3"


def test_load_rejects_wrong_edge_count(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("4 3\n0 1\n0 2\n")
    with pytest.raises(GraphError):
        load_graph(path)


def test_girth_condition_petersen(petersen):
    p = derive(10, 3, 2)
    rep = check_girth_condition(petersen, p, "dense")
    assert rep.girth == 5
    assert rep.required == 10 * p.h * 2
    assert not rep.hypothesis_ok  # 5 < 10*h*2
    assert rep.walk_simplicity_ok  # 5 > 2


def test_girth_condition_heawood_walk_simplicity(heawood):
    p = derive(14, 3, 3)
    rep = check_girth_condition(heawood, p, "dense")
    assert rep.walk_simplicity_ok  # 6 > 3


def test_girth_condition_long_cycle():
    g = load_fixture("cycle(200)")
    p = derive(200, 3, 10)
    # the hypothesis compares against 10*h*l with the derived h; pin h=2 as in
    # the boundary example by constructing the report threshold directly
    from dataclasses import replace
    p2 = replace(p, h=2)
    rep = check_girth_condition(g, p2, "dense")
    assert rep.girth == 200
    assert rep.required == 200
    assert rep.hypothesis_ok
