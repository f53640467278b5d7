"""Score-vs-score and score-vs-distance correlations over node pairs.

Rows are exported raw (one per pair) together with Pearson and Spearman
coefficients; trend fitting and plotting are left to the consumer.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.sparse import csgraph

from .graph import DomainError, Graph
from .predictors import DEFAULT_EAGER_CAP, PredictorId, score_matrix, score_pairs

__all__ = [
    "CorrelationReport",
    "PairFilter",
    "SUMMARY_HEADER",
    "correlate",
    "distance_correlation",
    "score_correlation",
    "select_pairs",
]

SUMMARY_HEADER = ("x", "y", "n_points", "pearson", "spearman", "excluded_unreachable", "pair_filter")


@dataclass(frozen=True)
class PairFilter:
    """Which pairs to include: ``all``, ``nonadjacent``, or a uniform
    ``sample`` of ``size`` distinct pairs drawn with ``seed``.  A sample may
    additionally be restricted to non-adjacent pairs."""

    kind: str = "all"
    size: int = 0
    seed: int = 0
    nonadjacent: bool = False

    def __post_init__(self):
        if self.kind not in ("all", "nonadjacent", "sample"):
            raise DomainError(f"unknown pair filter {self.kind!r}")
        if self.kind == "sample" and self.size < 1:
            raise DomainError("a sample filter needs size >= 1")

    def describe(self) -> str:
        if self.kind == "sample":
            extra = ",nonadjacent" if self.nonadjacent else ""
            return f"sample:{self.size}:seed={self.seed}{extra}"
        return self.kind


@dataclass
class CorrelationReport:
    x_label: str
    y_label: str
    n_points: int
    pearson: float | None
    spearman: float | None
    rows: list[tuple[int, int, float, float]]
    excluded_unreachable: int = 0
    pair_filter: str = "all"
    points_path: str | None = None

    def summary_row(self) -> list:
        def fmt(x):
            return "" if x is None else repr(x)

        return [
            self.x_label, self.y_label, self.n_points, fmt(self.pearson), fmt(self.spearman),
            self.excluded_unreachable, self.pair_filter,
        ]

    def write_points(self, fh: io.TextIOBase, g: Graph | None = None) -> None:
        """Points CSV; ``log_ok`` is 0 where either value is not positive
        (such points vanish on a double-logarithmic plot)."""
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["u", "v", self.x_label, self.y_label, "log_ok"])
        for u, v, x, y in self.rows:
            lu, lv = (g.label(u), g.label(v)) if g is not None else (u, v)
            w.writerow([lu, lv, _num(x), _num(y), int(x > 0 and y > 0)])


def _num(x: float):
    return int(x) if float(x).is_integer() and abs(x) < 2**53 else repr(float(x))


def select_pairs(g: Graph, pf: PairFilter) -> np.ndarray:
    """Selected pairs as a ``(k, 2)`` array sorted by ``(u, v)``, ``u < v``."""
    n = g.num_nodes
    if pf.kind == "sample":
        total = n * (n - 1) // 2
        rng = np.random.default_rng(pf.seed)
        keys: list[np.ndarray] = []
        have = 0
        seen = np.empty(0, dtype=np.int64)
        edge_keys = g.edge_array[:, 0] * n + g.edge_array[:, 1]
        limit = total - (g.num_edges if pf.nonadjacent else 0)
        want = min(pf.size, limit)
        while have < want:
            draw = rng.integers(0, n, size=(2 * (want - have) + 16, 2))
            lo, hi = draw.min(axis=1), draw.max(axis=1)
            k = (lo * n + hi)[lo != hi]
            if pf.nonadjacent:
                k = k[~np.isin(k, edge_keys)]
            k = k[~np.isin(k, seen)]
            _, first = np.unique(k, return_index=True)
            k = k[np.sort(first)][: want - have]
            keys.append(k)
            seen = np.concatenate([seen, k])
            have += len(k)
        chosen = np.sort(seen)
        return np.stack([chosen // n, chosen % n], axis=1)
    r, s = np.triu_indices(n, k=1)
    if pf.kind == "nonadjacent":
        mask = g.adjacency_matrix[r, s].A1 == 0
        r, s = r[mask], s[mask]
    return np.stack([r, s], axis=1).astype(np.int64)


def _coefficients(x: np.ndarray, y: np.ndarray) -> tuple[float | None, float | None]:
    if len(x) < 2 or np.all(x == x[0]) or np.all(y == y[0]):
        return None, None
    pearson = float(np.clip(stats.pearsonr(x, y)[0], -1.0, 1.0))
    spearman = float(stats.spearmanr(x, y)[0])
    return pearson, spearman


def _scores(g: Graph, p: PredictorId, pairs: np.ndarray, cap: int | None) -> np.ndarray:
    if cap is None or g.num_nodes <= cap:
        return score_pairs(g, p, pairs, matrix=score_matrix(g, p, cap=None))
    return score_pairs(g, p, pairs)


def score_correlation(
    g: Graph,
    p1: PredictorId | str,
    p2: PredictorId | str,
    pair_filter: PairFilter | None = None,
    eager_cap: int | None = DEFAULT_EAGER_CAP,
) -> CorrelationReport:
    p1, p2 = PredictorId.parse(p1), PredictorId.parse(p2)
    if g.num_nodes < 3:
        raise DomainError("correlations need at least three nodes")
    pf = pair_filter or PairFilter()
    pairs = select_pairs(g, pf)
    x = _scores(g, p1, pairs, eager_cap)
    y = x if p2 is p1 else _scores(g, p2, pairs, eager_cap)
    pearson, spearman = _coefficients(x, y)
    rows = [(int(u), int(v), float(a), float(b)) for (u, v), a, b in zip(pairs, x, y)]
    return CorrelationReport(p1.value, p2.value, len(rows), pearson, spearman, rows, 0, pf.describe())


def distance_correlation(
    g: Graph,
    p: PredictorId | str,
    pair_filter: PairFilter | None = None,
    eager_cap: int | None = DEFAULT_EAGER_CAP,
) -> CorrelationReport:
    """Hop distance (x) against predictor score (y); unreachable pairs are
    dropped and tallied."""
    p = PredictorId.parse(p)
    _, comp = csgraph.connected_components(g.adjacency_matrix, directed=False)
    if np.bincount(comp).max() < 3:
        raise DomainError("no connected component has three or more nodes")
    pf = pair_filter or PairFilter()
    pairs = select_pairs(g, pf)
    reachable = comp[pairs[:, 0]] == comp[pairs[:, 1]]
    excluded = int((~reachable).sum())
    pairs = pairs[reachable]
    dist = np.empty(len(pairs))
    if len(pairs):
        sources, inverse = np.unique(pairs[:, 0], return_inverse=True)
        for i in range(0, len(sources), 256):
            block = sources[i:i + 256]
            d = csgraph.shortest_path(g.adjacency_matrix, directed=False, unweighted=True, indices=block)
            sel = (inverse >= i) & (inverse < i + len(block))
            dist[sel] = d[inverse[sel] - i, pairs[sel, 1]]
    y = _scores(g, p, pairs, eager_cap)
    pearson, spearman = _coefficients(dist, y)
    rows = [(int(u), int(v), float(d), float(s)) for (u, v), d, s in zip(pairs, dist, y)]
    return CorrelationReport("distance", p.value, len(rows), pearson, spearman, rows, excluded, pf.describe())


def correlate(
    g: Graph,
    x: str,
    y: str,
    pair_filter: PairFilter | None = None,
    eager_cap: int | None = DEFAULT_EAGER_CAP,
) -> CorrelationReport:
    """Dispatch on axis names; ``distance`` is accepted for either axis."""
    if x == "distance" and y == "distance":
        raise DomainError("at most one axis may be 'distance'")
    if x == "distance":
        return distance_correlation(g, y, pair_filter, eager_cap)
    if y == "distance":
        rep = distance_correlation(g, x, pair_filter, eager_cap)
        rep.rows = [(u, v, s, d) for u, v, d, s in rep.rows]
        rep.x_label, rep.y_label = rep.y_label, rep.x_label
        return rep
    return score_correlation(g, x, y, pair_filter, eager_cap)
