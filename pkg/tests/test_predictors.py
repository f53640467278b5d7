import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from localblock.graph import DomainError, Graph, parse_edge_list
from localblock.predictors import (
    CapacityError,
    PredictorId,
    aa_score,
    block_density,
    cn_score,
    degree_block,
    inter_block_density,
    inter_block_edges,
    lb_score,
    pa_score,
    ra_score,
    score,
    score_all_pairs,
    score_matrix,
    score_pairs,
    score_rows,
)

from conftest import random_graph
from oracles import BlockOracle, build_blocks, inter_edges

PREDICTORS = list(PredictorId)


def _block(g, u):
    return degree_block(g, u).members


# --- block densities -----------------------------------------------------------


@pytest.mark.parametrize("k, expected", [(3, 0.5), (0, 2.0), (1, 1.0)])
def test_block_density(k, expected):
    g = Graph.from_edges(k + 1, [(0, i) for i in range(1, k + 1)])
    assert block_density(g, 0) == expected


def test_degree_block_members(star4):
    b = degree_block(star4, 0)
    assert b.center in b.members
    assert len(b.members) == star4.degree(0) + 1


def test_inter_block_edges_triangle(triangle):
    edges = triangle.edges()
    assert inter_edges(_block(triangle, 0), _block(triangle, 1), edges) == 3
    assert inter_block_edges(triangle, 0, 1) == 3
    assert inter_block_density(triangle, 0, 1) == 3 / 9


def test_inter_block_edges_disjoint():
    g = parse_edge_list("a b\nc d")
    assert inter_edges(_block(g, 0), _block(g, 2), g.edges()) == 0
    assert inter_block_edges(g, 0, 2) == 0
    assert inter_block_density(g, 0, 2) == 0.0


def test_inter_block_edges_path(path3):
    assert inter_edges(_block(path3, 0), _block(path3, 2), path3.edges()) == 2
    assert inter_block_edges(path3, 0, 2) == 2


def test_overlapping_blocks_denominator():
    # u=0, v=1 share neighbors 2,3,4; each also has two private neighbors
    edges = [(0, c) for c in (2, 3, 4, 5, 6)] + [(1, c) for c in (2, 3, 4, 7, 8)]
    g = Graph.from_edges(9, edges)
    assert len(_block(g, 0)) == len(_block(g, 1)) == 6
    e = inter_block_edges(g, 0, 1)
    assert e == inter_edges(_block(g, 0), _block(g, 1), edges)
    assert inter_block_density(g, 0, 1) == e / 36


def test_inter_block_edges_matches_predicate_on_random_graphs():
    rng = random.Random(2)
    for _ in range(30):
        g, edges = random_graph(rng, rng.randint(3, 16), rng.uniform(0.1, 0.7))
        blocks = dict(build_blocks(g.num_nodes, edges))
        for u in range(g.num_nodes):
            for v in range(u + 1, g.num_nodes):
                assert inter_block_edges(g, u, v) == inter_edges(blocks[u], blocks[v], edges)


def test_inter_block_same_node(triangle):
    with pytest.raises(DomainError):
        inter_block_edges(triangle, 1, 1)
    with pytest.raises(DomainError):
        inter_block_density(triangle, 1, 1)


# --- LB -------------------------------------------------------------------------


def test_lb_path(path3):
    assert BlockOracle(3, path3.edges()).lb(0, 2) == pytest.approx(2 / 3, abs=1e-15)
    assert lb_score(path3, 0, 2) == pytest.approx(2 / 3, abs=1e-15)


def test_lb_triangle(triangle):
    assert BlockOracle(3, triangle.edges()).lb(0, 1) == pytest.approx(1.0, abs=1e-15)
    assert lb_score(triangle, 0, 1) == pytest.approx(1.0, abs=1e-15)


def test_lb_isolated_pair():
    g = Graph.from_edges(4, [(0, 1)])
    assert lb_score(g, 2, 3) == 0.0


def test_lb_same_node(triangle):
    with pytest.raises(DomainError):
        lb_score(triangle, 0, 0)


def test_lb_adjacent_pair_uses_local_form(path3):
    # (a, b): N(a)-CN = {b}, N(b)-CN = {a, c}; no common neighbors
    expected = inter_block_density(path3, 1, 0) + inter_block_density(path3, 1, 2)
    assert lb_score(path3, 0, 1) == pytest.approx(expected, abs=1e-15)


def test_lb_matches_oracle_small_random_graphs():
    rng = random.Random(7)
    for _ in range(40):
        g, edges = random_graph(rng, rng.randint(4, 18), rng.uniform(0.1, 0.6))
        oracle = BlockOracle(g.num_nodes, edges)
        m = score_matrix(g, "lb")
        for r in range(g.num_nodes):
            for s in range(r + 1, g.num_nodes):
                expected = oracle.lb(r, s)
                assert abs(lb_score(g, r, s) - expected) <= 1e-12
                assert abs(m[r, s] - expected) <= 1e-12


# --- baselines ------------------------------------------------------------------


def test_pa(star4, triangle):
    assert pa_score(star4, 0, 1) == 4.0
    g = Graph.from_edges(3, [(0, 1)])
    assert pa_score(g, 2, 0) == 0.0
    assert pa_score(triangle, 0, 2) == 4.0


def test_cn(path3, k4):
    assert cn_score(path3, 0, 2) == 1.0
    assert cn_score(k4, 0, 3) == len({1, 2} & {1, 2})  # enumerated common neighbors
    assert cn_score(k4, 0, 3) == 2.0
    assert cn_score(parse_edge_list("a b\nc d"), 0, 2) == 0.0


def test_aa(path3, k4):
    assert aa_score(path3, 0, 2) == pytest.approx(1 / math.log(2), abs=1e-15)
    assert aa_score(path3, 0, 2) == pytest.approx(1.4426950408889634, abs=1e-12)
    assert aa_score(parse_edge_list("a b\nc d"), 0, 2) == 0.0
    assert aa_score(k4, 0, 1) == pytest.approx(2 / math.log(3), abs=1e-15)
    assert aa_score(k4, 0, 1) == pytest.approx(1.8204784532536746, abs=1e-12)


def test_ra(path3, k4):
    assert ra_score(path3, 0, 2) == 0.5
    assert ra_score(parse_edge_list("a b\nc d"), 0, 2) == 0.0
    assert ra_score(k4, 0, 1) == pytest.approx(2 / 3, abs=1e-15)


@pytest.mark.parametrize("fn", [pa_score, cn_score, aa_score, ra_score, lb_score])
def test_identical_nodes_rejected(fn, triangle):
    with pytest.raises(DomainError):
        fn(triangle, 2, 2)


def test_predictor_parse():
    assert PredictorId.parse("LB") is PredictorId.LB
    assert PredictorId.parse(PredictorId.RA) is PredictorId.RA
    with pytest.raises(ValueError):
        PredictorId.parse("katz")


# --- all pairs ------------------------------------------------------------------


def test_score_all_pairs_triangle(triangle):
    lb = score_all_pairs(triangle, "lb")
    cn = score_all_pairs(triangle, "cn")
    assert len(lb) == 3
    for r, s, v in lb.items():
        assert v == pytest.approx(1.0, abs=1e-15)
    assert [v for *_, v in cn.items()] == [1.0, 1.0, 1.0]


@pytest.mark.parametrize("p", PREDICTORS)
def test_empty_two_node_graph(p):
    g = Graph.from_edges(2, [])
    table = score_all_pairs(g, p)
    assert list(table.items()) == [(0, 1, 0.0)]
    assert score_all_pairs(g, p, eager=False).score(0, 1) == 0.0


def test_capacity_error():
    g = Graph.from_edges(10, [(0, 1)])
    with pytest.raises(CapacityError):
        score_all_pairs(g, "lb", cap=5)
    assert score_all_pairs(g, "lb", eager=False).score(2, 3) == 0.0
    assert score_all_pairs(g, "lb", eager=False).score(0, 1) == 0.25
    with pytest.raises(DomainError):
        score_all_pairs(Graph.from_edges(1, []), "cn")


def test_top_excludes_edges(path3):
    table = score_all_pairs(path3, "cn")
    assert table.top(5) == [(0, 2, 1.0)]
    lazy = score_all_pairs(path3, "cn", eager=False)
    assert lazy.top(5) == table.top(5)
    assert len(table.top(5, exclude_edges=False)) == 3


@pytest.mark.parametrize("p", PREDICTORS)
def test_routes_agree(p):
    rng = random.Random(31)
    for _ in range(8):
        g, _ = random_graph(rng, rng.randint(3, 35), rng.uniform(0.05, 0.5))
        n = g.num_nodes
        m = score_matrix(g, p)
        rows = score_rows(g, p, range(n))
        assert np.allclose(m, m.T, atol=0, rtol=0)
        assert np.abs(m - rows).max() <= 1e-12
        r, s = np.triu_indices(n, k=1)
        pairs = np.stack([r, s], axis=1)
        one_by_one = score_pairs(g, p, pairs, by_rows=False)
        grouped = score_pairs(g, p, pairs, by_rows=True)
        assert np.abs(m[r, s] - one_by_one).max(initial=0) <= 1e-12
        assert np.abs(grouped - one_by_one).max(initial=0) <= 1e-12


# --- properties -----------------------------------------------------------------

small_graphs = st.integers(2, 12).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda e: e[0] < e[1]),
                max_size=40),
    )
)


@settings(max_examples=60, deadline=None)
@given(small_graphs)
def test_score_properties(data):
    n, edges = data
    g = Graph.from_edges(n, edges)
    for r in range(n):
        for s in range(r + 1, n):
            vals = {p: score(g, p, r, s) for p in PREDICTORS}
            for p in PREDICTORS:
                assert vals[p] == score(g, p, s, r)  # exact symmetry
                assert vals[p] >= 0.0
            assert vals[PredictorId.CN] <= min(g.degree(r), g.degree(s))
            common = g.adjacency[r] & g.adjacency[s]
            assert all(g.degree(z) >= 2 for z in common)
            assert vals[PredictorId.AA] >= vals[PredictorId.RA]
            if vals[PredictorId.AA] == vals[PredictorId.RA]:
                assert vals[PredictorId.AA] == 0.0
            intra = sum(2.0 / (g.degree(w) + 1) for w in common)
            assert vals[PredictorId.LB] >= intra - 1e-15


@settings(max_examples=30, deadline=None)
@given(small_graphs, st.randoms(use_true_random=False))
def test_isomorphism_invariance(data, rnd):
    n, edges = data
    g = Graph.from_edges(n, edges)
    perm = list(range(n))
    rnd.shuffle(perm)
    h = g.relabel(perm)
    for p in PREDICTORS:
        mg = score_matrix(g, p)
        mh = score_matrix(h, p)
        assert np.allclose(mh[np.ix_(perm, perm)], mg, rtol=0, atol=1e-12)
        for r in range(n):
            for s in range(r + 1, n):
                assert score(h, p, perm[r], perm[s]) == pytest.approx(score(g, p, r, s), abs=1e-12)
