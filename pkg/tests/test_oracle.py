import pytest

from walkalloc import girth, load_fixture
from walkalloc.oracle import (enumerate_canonical_walks, enumerate_walks,
                              ordered_walk_count, unordered_walk_count)


@pytest.mark.parametrize("name,lengths", [
    ("petersen", range(1, 5)),
    ("heawood", range(1, 6)),
    ("k4", range(1, 3)),
])
def test_enumeration_matches_formulas(name, lengths):
    g = load_fixture(name)
    for l in lengths:
        walks = enumerate_walks(g, l)
        assert len(walks) == ordered_walk_count(g.n, g.d, l)
        assert len(set(walks)) == len(walks)
        if girth(g) > l:
            canon = enumerate_canonical_walks(g, l)
            assert len(canon) == unordered_walk_count(g.n, g.d, l)


def test_enumerated_walks_are_valid(petersen):
    for w in enumerate_walks(petersen, 3):
        for i in range(1, len(w)):
            assert petersen.has_edge(w[i - 1], w[i])
            if i >= 2:
                assert w[i] != w[i - 2]


def test_reverse_closure(heawood):
    walks = set(enumerate_walks(heawood, 4))
    assert all(w[::-1] in walks for w in walks)


def test_enumeration_guardrails(petersen):
    with pytest.raises(ValueError):
        enumerate_walks(petersen, 0)
    with pytest.raises(ValueError):
        enumerate_walks(petersen, 40)  # would blow the enumeration limit
