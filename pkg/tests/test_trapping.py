import itertools

import numpy as np
import pytest

from gallager3.decoder import gallager_a_decode, is_fixed_point
from gallager3.tanner import GraphError, TannerGraph
from gallager3.trapping import (
    MAX_CRITICAL_SEARCH,
    classify_subset,
    critical_number,
    find_53_structures,
    find_80_codewords,
    find_three_three,
    has_53,
)

from conftest import SMALL, load
from oracles import brute_53, brute_codewords, naive_classify, naive_gallager, six_cycle_triples


def test_classify_matches_naive(small_graph):
    rng = np.random.default_rng(small_graph.n * 31 + small_graph.m)
    for k in range(1, min(small_graph.n, 9)):
        for _ in range(6):
            s = sorted(rng.choice(small_graph.n, k, replace=False).tolist())
            rep = classify_subset(small_graph, s)
            assert (rep.V, rep.C, rep.cond_a, rep.cond_b) == naive_classify(small_graph, s)


def test_classify_six_cycle_is_33():
    g = load("girth6")
    trio = find_three_three(g)[0]
    rep = classify_subset(g, trio)
    assert rep.label == "(3,3)" and rep.cond_a
    assert len(rep.even_checks) == 3


def test_classify_rejects_empty():
    with pytest.raises(GraphError):
        classify_subset(load("fano"), [])


def test_three_three_matches_brute_force(small_graph):
    assert find_three_three(small_graph) == six_cycle_triples(small_graph)


def test_three_three_empty_iff_girth_at_least_8(small_graph):
    assert (not find_three_three(small_graph)) == (small_graph.girth() >= 8)


def test_53_matches_brute_force(small_graph):
    found = [r.vars for r in find_53_structures(small_graph)]
    assert found == brute_53(small_graph, connected_only=True)
    if small_graph.girth() >= 8:
        # at girth eight every set with the profile is connected
        assert found == brute_53(small_graph, connected_only=False)


def test_53_approximate_flag(small_graph):
    reps = find_53_structures(small_graph)
    assert all(r.approximate == (small_graph.girth() < 8) for r in reps)


def test_53_restricted_search(small_graph):
    full = [r.vars for r in find_53_structures(small_graph)]
    for v in range(small_graph.n):
        mine = [r.vars for r in find_53_structures(small_graph, restrict_to_var=v)]
        assert mine == [s for s in full if v in s]
        assert has_53(small_graph, v) == bool(mine)


def test_53_in_gq22_are_k23():
    g = load("gq22")
    reps = find_53_structures(g)
    assert len(reps) == 60
    for r in reps:
        assert sorted(g.induced_subgraph_degrees(r.vars).values()) == [1, 1, 1, 2, 2, 2, 2, 2, 2]


def test_53_lookahead_on_partial_graph():
    """Two variables sharing three checks' worth of paths: the lookahead flags what plain search cannot."""
    g = load("gq22")
    s = find_53_structures(g)[0].vars
    partial = TannerGraph(g.n, g.m)
    # keep all edges of the structure except the odd edges (degree-1 checks)
    deg = g.induced_subgraph_degrees(s)
    for v in s:
        for c in g.var_adj[v]:
            if deg[c] == 2:
                partial.add_edge(v, c)
    assert not has_53(partial, s[0])
    assert has_53(partial, s[0], gamma=3)


def test_codewords_match_brute_force(small_graph):
    res = find_80_codewords(small_graph)
    assert res.exhaustive
    assert res.supports == brute_codewords(small_graph, 8)


def test_codeword_search_budget():
    res = find_80_codewords(load("girth6"), budget=10)
    assert not res.exhaustive


def test_codewords_are_codewords():
    g = load("girth6")
    res = find_80_codewords(g)
    assert res.supports
    for s in res.supports:
        assert g.is_codeword(g.word_from_support(s))
        rep = classify_subset(g, s)
        assert rep.C == 0
    assert all(len(s) == 4 for s in res.of_weight(4))


def test_critical_number_33_is_three():
    g = load("girth6")
    hits = [t for t in find_three_three(g) if is_fixed_point(g, t)]
    assert hits
    res = critical_number(g, hits[0])
    assert res.value == 3 and res.witness == tuple(hits[0])


def test_critical_number_matches_naive_decoder():
    g = load("gq22_minus3")
    for rep in find_53_structures(g):
        res = critical_number(g, rep.vars)
        expected = None
        for k in range(1, 6):
            for sub in itertools.combinations(rep.vars, k):
                est, _, ok = naive_gallager(g, g.word_from_support(sub), 50)
                if not ok or any(est):
                    expected = (k, sub)
                    break
            if expected:
                break
        assert (res.value, res.witness) == (expected if expected else (None, None))


def test_53_gadget_is_trapping_set_with_critical_number_three():
    g = load("gq22_minus3")
    traps = [r for r in find_53_structures(g) if r.is_trapping_set]
    assert traps
    for r in traps:
        assert is_fixed_point(g, r.vars)
        out = gallager_a_decode(g, g.word_from_support(r.vars))
        assert out.residual_error_support == list(r.vars)
        assert critical_number(g, r.vars).value == 3


def test_critical_number_search_bound():
    g = load("girth6")
    with pytest.raises(GraphError):
        critical_number(g, range(MAX_CRITICAL_SEARCH + 1))
    assert not critical_number(load("gq22"), [0]).found


# Witnesses found by search on the GQ(2,2)-derived fixtures: three errors inside
# a (5,3) trapping set, and inside a weight-8 codeword, defeat the decoder.
WITNESSES = [
    ("gq22_minus3", (0, 2, 5, 8, 9), "(5,3)", (2, 5, 8)),
    ("gq22_minus1", (3, 7, 8, 9, 11), "(5,3)", (8, 9, 11)),
    ("gq22_minus1", (0, 1, 2, 3, 4, 5, 6, 7), "(8,0)", (0, 1, 2)),
    ("gq22_minus3", (0, 1, 4, 5, 7, 8, 9, 10), "(8,0)", (4, 7, 9)),
]


@pytest.mark.parametrize("name, support, label, witness", WITNESSES)
def test_recorded_critical_number_witnesses(name, support, label, witness):
    g = load(name)
    assert g.girth() >= 8
    rep = classify_subset(g, support)
    assert rep.label == label and rep.is_trapping_set
    res = critical_number(g, support)
    assert (res.value, res.witness) == (3, witness)
    est, _, ok = naive_gallager(g, g.word_from_support(witness), 50)
    assert not ok or any(est)
