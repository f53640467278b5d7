"""Topology statistics: density, clustering, mean degree and mean distance."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.sparse import csgraph

from .graph import DomainError, Graph

__all__ = ["TopologyStats", "local_clustering", "clustering_coefficients", "topology_stats", "STATS_HEADER"]

STATS_HEADER = ("dataset", "nodes", "edges", "density", "avg_clustering", "avg_degree", "avg_path")


@dataclass(frozen=True)
class TopologyStats:
    num_nodes: int
    num_edges: int
    density: float
    avg_clustering: float
    avg_degree: float
    avg_shortest_path: float
    reachable_pairs: int

    def as_row(self, dataset: str) -> list:
        return [
            dataset,
            self.num_nodes,
            self.num_edges,
            self.density,
            self.avg_clustering,
            self.avg_degree,
            self.avg_shortest_path,
        ]

    def as_dict(self) -> dict:
        return asdict(self)


def local_clustering(g: Graph, u: int) -> float:
    """Fraction of neighbor pairs of ``u`` that are linked; 0 when k_u < 2."""
    u = g.check_node(u)
    nb = g.adjacency[u]
    k = len(nb)
    if k < 2:
        return 0.0
    links = sum(len(g.adjacency[a] & nb) for a in nb) // 2
    return 2.0 * links / (k * (k - 1))


def clustering_coefficients(g: Graph) -> np.ndarray:
    a = g.adjacency_matrix
    triangles = np.asarray((a @ a).multiply(a).sum(axis=1)).ravel() / 2.0
    k = g.degrees.astype(np.float64)
    possible = k * (k - 1) / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(k >= 2, triangles / np.where(possible > 0, possible, 1.0), 0.0)


def _distance_totals(g: Graph, chunk: int = 256) -> tuple[float, int]:
    """Sum of hop distances and count over reachable ordered pairs u != v."""
    a = g.adjacency_matrix
    total = 0.0
    count = 0
    n = g.num_nodes
    for start in range(0, n, chunk):
        idx = np.arange(start, min(start + chunk, n))
        d = csgraph.shortest_path(a, method="D", directed=False, unweighted=True, indices=idx)
        finite = np.isfinite(d) & (d > 0)
        total += float(d[finite].sum())
        count += int(finite.sum())
    return total, count


def topology_stats(g: Graph) -> TopologyStats:
    """Compute all statistics.

    The mean distance averages over reachable distinct pairs only, so a
    disconnected graph is averaged per component rather than failing.
    """
    n, m = g.num_nodes, g.num_edges
    if n < 2:
        raise DomainError("topology statistics need at least two nodes")
    total, count = _distance_totals(g)
    avg_path = total / count if count else float("nan")
    return TopologyStats(
        num_nodes=n,
        num_edges=m,
        density=2.0 * m / (n * (n - 1)),
        avg_clustering=float(clustering_coefficients(g).mean()),
        avg_degree=2.0 * m / n,
        avg_shortest_path=avg_path,
        reachable_pairs=count // 2,
    )
