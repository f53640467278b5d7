import random

import networkx as nx
import pytest

from localblock.graph import DomainError, Graph, parse_edge_list
from localblock.metrics import clustering_coefficients, local_clustering, topology_stats

from conftest import random_graph


def test_local_clustering_examples(triangle, star4, path3):
    assert local_clustering(triangle, 0) == 1.0
    assert local_clustering(star4, 0) == 0.0
    assert local_clustering(path3, 1) == 0.0
    assert local_clustering(path3, 0) == 0.0  # degree 1


def test_local_clustering_invalid(triangle):
    with pytest.raises(DomainError):
        local_clustering(triangle, 5)


def test_triangle_stats(triangle):
    st = topology_stats(triangle)
    assert (st.density, st.avg_clustering, st.avg_degree, st.avg_shortest_path) == (1.0, 1.0, 2.0, 1.0)


def test_path_stats(path3):
    # pairs (a,b)=1, (b,c)=1, (a,c)=2
    st = topology_stats(path3)
    assert st.density == pytest.approx(2 / 3, abs=1e-15)
    assert st.avg_clustering == 0.0
    assert st.avg_degree == pytest.approx(4 / 3, abs=1e-15)
    assert st.avg_shortest_path == pytest.approx(4 / 3, abs=1e-15)


def test_needs_two_nodes():
    with pytest.raises(DomainError):
        topology_stats(Graph.from_edges(1, []))


@pytest.mark.parametrize("n", [3, 4, 7, 12])
def test_complete_graph(n):
    g = Graph.from_edges(n, [(a, b) for a in range(n) for b in range(a + 1, n)])
    st = topology_stats(g)
    assert st.density == 1.0
    assert st.avg_clustering == 1.0
    assert st.avg_shortest_path == 1.0


def test_disconnected_averages_reachable_pairs():
    g = parse_edge_list("a b\nb c\nx y\n")
    st = topology_stats(g)
    # pairs: a-b 1, b-c 1, a-c 2, x-y 1
    assert st.avg_shortest_path == pytest.approx(5 / 4)
    assert st.reachable_pairs == 4


def test_matches_networkx_on_random_graphs():
    rng = random.Random(11)
    for _ in range(30):
        n = rng.randint(2, 40)
        g, edges = random_graph(rng, n, rng.uniform(0.05, 0.5))
        G = nx.Graph()
        G.add_nodes_from(range(n))
        G.add_edges_from(edges)
        st = topology_stats(g)
        m = len(edges)
        assert st.density == 2 * m / (n * (n - 1))
        assert st.avg_degree == 2 * m / n
        assert 0.0 <= st.density <= 1.0
        assert 0.0 <= st.avg_clustering <= 1.0
        assert st.avg_clustering == pytest.approx(nx.average_clustering(G), abs=1e-12)
        for u in range(n):
            assert local_clustering(g, u) == pytest.approx(nx.clustering(G, u), abs=1e-12)
        pairs = dist_sum = 0
        for u, d in nx.all_pairs_shortest_path_length(G):
            for v, x in d.items():
                if v > u:
                    pairs += 1
                    dist_sum += x
        if pairs:
            assert st.avg_shortest_path == pytest.approx(dist_sum / pairs, abs=1e-12)


def test_relabel_invariance():
    rng = random.Random(3)
    g, _ = random_graph(rng, 25, 0.15)
    perm = list(range(25))
    rng.shuffle(perm)
    a, b = topology_stats(g), topology_stats(g.relabel(perm))
    assert a.avg_shortest_path == b.avg_shortest_path
    assert a.avg_clustering == pytest.approx(b.avg_clustering, abs=1e-15)


def test_vectorized_clustering_matches_per_node():
    rng = random.Random(8)
    g, _ = random_graph(rng, 30, 0.3)
    cc = clustering_coefficients(g)
    for u in range(30):
        assert cc[u] == pytest.approx(local_clustering(g, u), abs=1e-15)
