"""Local Blocking (LB) index and the classic local proximity indices.

A *degree block* is a node together with its immediate neighbors.  The LB
score of a pair ``(r, s)`` adds up

* the inter-block link density between blocks centred at each neighbor
  ``u`` of ``r`` and each neighbor ``v`` of ``s`` (common neighbors
  excluded), and
* the intra-block density ``2 / (k_w + 1)`` of every common neighbor ``w``.

Per-pair functions work on neighbor sets.  :func:`score_matrix` evaluates a
predictor for every pair at once with sparse/dense linear algebra; both
routes are cross-checked in the tests.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

import numpy as np
import scipy.sparse as sp

from .graph import DomainError, Graph

__all__ = [
    "CapacityError",
    "DegreeBlock",
    "PredictorId",
    "ScoreTable",
    "aa_score",
    "block_density",
    "cn_score",
    "degree_block",
    "inter_block_density",
    "inter_block_edges",
    "lb_score",
    "pa_score",
    "ra_score",
    "score",
    "score_all_pairs",
    "score_matrix",
    "score_pairs",
    "score_rows",
    "DEFAULT_EAGER_CAP",
]

DEFAULT_EAGER_CAP = 5000


class CapacityError(RuntimeError):
    """Eager all-pairs scoring was requested for a graph above the cap."""


class PredictorId(str, enum.Enum):
    LB = "lb"
    PA = "pa"
    CN = "cn"
    AA = "aa"
    RA = "ra"

    @classmethod
    def parse(cls, value: "str | PredictorId") -> "PredictorId":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            names = ", ".join(p.value for p in cls)
            raise ValueError(f"unknown predictor {value!r}; expected one of {names}") from None

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class DegreeBlock:
    center: int
    members: frozenset[int]


def degree_block(g: Graph, u: int) -> DegreeBlock:
    u = g.check_node(u)
    return DegreeBlock(u, g.adjacency[u] | {u})


def _check_pair(g: Graph, r: int, s: int) -> tuple[int, int]:
    r, s = g.check_node(r), g.check_node(s)
    if r == s:
        raise DomainError(f"score undefined for identical nodes ({r}, {s})")
    return r, s


def block_density(g: Graph, u: int) -> float:
    """Link density inside the block centred at ``u``: ``2 / (k_u + 1)``.

    Only the star edges from the centre count, so the density depends on the
    centre's degree alone.
    """
    return 2.0 / (g.degree(u) + 1)


def inter_block_edges(g: Graph, u: int, v: int) -> int:
    """Number of edges with one end in block(u) and the other in block(v).

    Blocks may overlap; an edge lying entirely inside the overlap counts once.
    """
    u, v = _check_pair(g, u, v)
    adj = g.adjacency
    bx = adj[u] | {u}
    by = adj[v] | {v}
    # sum over a in X of |N(a) & Y| counts an edge inside X & Y twice
    ordered = sum(len(adj[a] & by) for a in bx)
    overlap = bx & by
    inside = sum(len(adj[a] & overlap) for a in overlap) // 2
    return ordered - inside


def inter_block_density(g: Graph, u: int, v: int) -> float:
    e = inter_block_edges(g, u, v)
    return e / ((g.degree(u) + 1) * (g.degree(v) + 1))


def lb_score(g: Graph, r: int, s: int) -> float:
    r, s = sorted(_check_pair(g, r, s))  # fixed summation order keeps it exactly symmetric
    adj = g.adjacency
    common = adj[r] & adj[s]
    only_r = sorted(adj[r] - common)
    only_s = sorted(adj[s] - common)
    total = 0.0
    for u in only_r:
        for v in only_s:
            total += inter_block_density(g, u, v)
    for w in sorted(common):
        total += 2.0 / (len(adj[w]) + 1)
    return total


def pa_score(g: Graph, r: int, s: int) -> float:
    r, s = _check_pair(g, r, s)
    return float(len(g.adjacency[r]) * len(g.adjacency[s]))


def cn_score(g: Graph, r: int, s: int) -> float:
    r, s = _check_pair(g, r, s)
    return float(len(g.adjacency[r] & g.adjacency[s]))


def aa_score(g: Graph, r: int, s: int, log: Callable[[float], float] = math.log) -> float:
    r, s = _check_pair(g, r, s)
    adj = g.adjacency
    return sum(1.0 / log(len(adj[z])) for z in sorted(adj[r] & adj[s]))


def ra_score(g: Graph, r: int, s: int) -> float:
    r, s = _check_pair(g, r, s)
    adj = g.adjacency
    return sum(1.0 / len(adj[z]) for z in sorted(adj[r] & adj[s]))


_PAIR_FUNCS = {
    PredictorId.LB: lb_score,
    PredictorId.PA: pa_score,
    PredictorId.CN: cn_score,
    PredictorId.AA: aa_score,
    PredictorId.RA: ra_score,
}


def score(g: Graph, p: PredictorId | str, r: int, s: int) -> float:
    return _PAIR_FUNCS[PredictorId.parse(p)](g, r, s)


# --- all-pairs linear algebra -------------------------------------------------


def _overlap_incidence(g: Graph) -> sp.csr_matrix:
    """``W`` with one row per edge ``(a, b)`` marking the nodes whose block
    holds both ends: ``a``, ``b`` and their common neighbors."""
    w = g._cache.get("overlap_incidence")
    if w is not None:
        return w
    n = g.num_nodes
    edges = g.edge_array
    a = g.adjacency_matrix
    if len(edges):
        common = a[edges[:, 0]].multiply(a[edges[:, 1]]).tocsr()
        ends = sp.csr_matrix(
            (np.ones(2 * len(edges)), (np.repeat(np.arange(len(edges)), 2), edges.ravel())),
            shape=(len(edges), n),
        )
        w = (common + ends).tocsr()
    else:
        w = sp.csr_matrix((0, n))
    g._cache["overlap_incidence"] = w
    return w


def _closed_adjacency(g: Graph) -> sp.csr_matrix:
    m = g._cache.get("closed_adjacency")
    if m is None:
        m = (g.adjacency_matrix + sp.identity(g.num_nodes, format="csr")).tocsr()
        g._cache["closed_adjacency"] = m
    return m


def _inter_block_edge_matrix(g: Graph) -> np.ndarray:
    """Dense matrix of :func:`inter_block_edges` for all pairs (diagonal 0).

    With ``M = A + I`` the ordered count is ``M A M``; edges inside the
    overlap of the two blocks are double counted and removed via ``W^T W``
    (see :func:`_overlap_incidence`).
    """
    a = g.adjacency_matrix
    m = _closed_adjacency(g)
    w = _overlap_incidence(g)
    out = (m @ a @ m).toarray() - (w.T @ w).toarray()
    np.fill_diagonal(out, 0.0)
    return out


def _wedge_matrix(g: Graph) -> tuple[sp.csr_matrix, np.ndarray]:
    """Rows are unordered pairs ``(u, v)`` with at least one common neighbor;
    row ``(u, v)`` marks ``N(u) & N(v)``.  Returns the matrix and the pair
    endpoints."""
    n = g.num_nodes
    rows_u: list[np.ndarray] = []
    rows_v: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    for w in range(n):
        nb = np.array(sorted(g.adjacency[w]), dtype=np.int64)
        if len(nb) < 2:
            continue
        i, j = np.triu_indices(len(nb), k=1)
        rows_u.append(nb[i])
        rows_v.append(nb[j])
        cols.append(np.full(len(i), w, dtype=np.int64))
    if not cols:
        return sp.csr_matrix((0, n)), np.zeros((0, 2), dtype=np.int64)
    pu = np.concatenate(rows_u)
    pv = np.concatenate(rows_v)
    key = pu * n + pv
    uniq, row = np.unique(key, return_inverse=True)
    c = sp.csr_matrix(
        (np.ones(len(key)), (row, np.concatenate(cols))), shape=(len(uniq), n)
    )
    pairs = np.stack([uniq // n, uniq % n], axis=1)
    return c, pairs


def _lb_matrix(g: Graph) -> np.ndarray:
    n = g.num_nodes
    a = g.adjacency_matrix
    k1 = g.degrees.astype(np.float64) + 1.0
    # b[u, v] = inter-block density, zero diagonal
    b = _inter_block_edge_matrix(g) / np.outer(k1, k1)

    ab = np.asarray(a @ b)  # (A B)[r, v] = sum_{u in N(r)} b[u, v]
    full = np.asarray((a @ ab.T).T)  # A B A
    # sum over u in CN(r,s), v in N(s) of b[u, v]
    k_mat = a.multiply(ab.T).tocsr()
    h = np.asarray(a @ k_mat.toarray())
    # sum over u, v both in CN(r,s)
    c, pairs = _wedge_matrix(g)
    if c.shape[0]:
        weights = 2.0 * b[pairs[:, 0], pairs[:, 1]]
        q = (c.T @ sp.diags(weights) @ c).toarray()
    else:
        q = np.zeros((n, n))
    intra = (a @ sp.diags(2.0 / k1) @ a).toarray()
    lb = full - h - h.T + q + intra
    lb = 0.5 * (lb + lb.T)
    np.fill_diagonal(lb, 0.0)
    # cancellation can leave -0.0 or tiny negatives where the exact value is 0
    np.maximum(lb, 0.0, out=lb)
    return lb


def _common_weighted(g: Graph, weights: np.ndarray) -> np.ndarray:
    a = g.adjacency_matrix
    out = (a @ sp.diags(weights) @ a).toarray()
    np.fill_diagonal(out, 0.0)
    return out


def score_matrix(
    g: Graph,
    p: PredictorId | str,
    cap: int | None = DEFAULT_EAGER_CAP,
    log: Callable[[np.ndarray], np.ndarray] = np.log,
) -> np.ndarray:
    """Dense symmetric ``n x n`` score matrix with a zero diagonal."""
    p = PredictorId.parse(p)
    n = g.num_nodes
    if cap is not None and n > cap:
        raise CapacityError(
            f"eager scoring of {n} nodes exceeds the cap of {cap}; use on-demand scoring "
            "(score_all_pairs(..., eager=False) or score_pairs)"
        )
    k = g.degrees.astype(np.float64)
    if p is PredictorId.LB:
        return _lb_matrix(g)
    if p is PredictorId.PA:
        out = np.outer(k, k)
        np.fill_diagonal(out, 0.0)
        return out
    if p is PredictorId.CN:
        return _common_weighted(g, np.ones(n))
    with np.errstate(divide="ignore"):
        if p is PredictorId.AA:
            # nodes with k < 2 are never common neighbors
            w = np.where(k >= 2, 1.0 / log(np.maximum(k, 2.0)), 0.0)
        else:
            w = np.where(k >= 1, 1.0 / np.maximum(k, 1.0), 0.0)
    return _common_weighted(g, w)


def _lb_row(g: Graph, r: int) -> np.ndarray:
    """LB scores of ``r`` against every node, from sparse products over the
    blocks of ``r``'s neighbors only."""
    n = g.num_nodes
    a = g.adjacency_matrix
    nb = np.array(sorted(g.adjacency[r]), dtype=np.int64)
    out = np.zeros(n)
    if len(nb) == 0:
        return out
    k1 = g.degrees.astype(np.float64) + 1.0
    m = _closed_adjacency(g)
    w = _overlap_incidence(g)
    wt = g._cache.get("overlap_incidence_t")
    if wt is None:
        wt = g._cache["overlap_incidence_t"] = w.T.tocsr()
    e_u = ((m[nb] @ a) @ m).toarray() - (wt[nb] @ w).toarray()
    e_u[np.arange(len(nb)), nb] = 0.0
    b_u = e_u / np.outer(k1[nb], k1)  # rows of the inter-block density matrix
    bsum = b_u.sum(axis=0)
    full = a @ bsum
    ba_u = np.asarray((a @ b_u.T).T)
    xt = a[nb]  # == a[:, nb].T by symmetry
    h = (xt.toarray() * ba_u).sum(axis=0)
    mask = np.zeros(n)
    mask[nb] = 1.0
    ht = a @ (mask * bsum)
    q = ((xt.T @ b_u[:, nb]) * xt.T.toarray()).sum(axis=1)
    intra = xt.T @ (2.0 / k1[nb])
    out = full - h - ht + q + intra
    out[r] = 0.0
    np.maximum(out, 0.0, out=out)
    return out


def score_rows(g: Graph, p: PredictorId | str, rows: Iterable[int]) -> np.ndarray:
    """Scores of each node in ``rows`` against all nodes, shape ``(len(rows), n)``."""
    p = PredictorId.parse(p)
    rows = np.asarray(list(rows), dtype=np.int64)
    n = g.num_nodes
    for r in rows:
        g.check_node(int(r))
    if p is PredictorId.LB:
        return np.vstack([_lb_row(g, int(r)) for r in rows]) if len(rows) else np.zeros((0, n))
    k = g.degrees.astype(np.float64)
    if p is PredictorId.PA:
        out = np.outer(k[rows], k)
    else:
        if p is PredictorId.CN:
            wts = np.ones(n)
        elif p is PredictorId.AA:
            wts = np.where(k >= 2, 1.0 / np.log(np.maximum(k, 2.0)), 0.0)
        else:
            wts = np.where(k >= 1, 1.0 / np.maximum(k, 1.0), 0.0)
        a = g.adjacency_matrix
        out = (a[rows] @ sp.diags(wts) @ a).toarray()
    out[np.arange(len(rows)), rows] = 0.0
    return out


def score_pairs(
    g: Graph,
    p: PredictorId | str,
    pairs: np.ndarray | Iterable[tuple[int, int]],
    matrix: np.ndarray | None = None,
    by_rows: bool | None = None,
) -> np.ndarray:
    """Scores for the given ``(r, s)`` pairs.

    Uses ``matrix`` when supplied.  Otherwise pairs are either scored one by
    one from neighbor sets or grouped by their first node and scored a row at
    a time (``by_rows``; by default chosen when many pairs share rows).
    """
    arr = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if matrix is not None:
        return matrix[arr[:, 0], arr[:, 1]]
    pid = PredictorId.parse(p)
    if by_rows is None:
        by_rows = len(arr) > 4 * len(np.unique(arr[:, 0])) or len(arr) > 256
    if not by_rows:
        fn = _PAIR_FUNCS[pid]
        return np.fromiter((fn(g, int(r), int(s)) for r, s in arr), dtype=np.float64, count=len(arr))
    if np.any(arr[:, 0] == arr[:, 1]):
        raise DomainError("score undefined for identical nodes")
    out = np.empty(len(arr))
    rows, inverse = np.unique(arr[:, 0], return_inverse=True)
    chunk = 64
    for i in range(0, len(rows), chunk):
        block = score_rows(g, pid, rows[i:i + chunk])
        sel = (inverse >= i) & (inverse < i + chunk)
        out[sel] = block[inverse[sel] - i, arr[sel, 1]]
    return out


class ScoreTable:
    """Scores of one predictor over all unordered pairs of a graph.

    Eager tables hold the full matrix; lazy tables evaluate on demand and
    memoise nothing.
    """

    def __init__(self, graph: Graph, predictor: PredictorId, matrix: np.ndarray | None = None):
        self.graph = graph
        self.predictor = predictor
        self.matrix = matrix

    @property
    def eager(self) -> bool:
        return self.matrix is not None

    def __len__(self) -> int:
        n = self.graph.num_nodes
        return n * (n - 1) // 2

    def score(self, r: int, s: int) -> float:
        if self.matrix is not None:
            r, s = _check_pair(self.graph, r, s)
            return float(self.matrix[r, s])
        return _PAIR_FUNCS[self.predictor](self.graph, r, s)

    __call__ = score

    def items(self) -> Iterator[tuple[int, int, float]]:
        """``(r, s, score)`` for every pair with ``r < s`` in lexicographic order."""
        n = self.graph.num_nodes
        for r in range(n):
            for s in range(r + 1, n):
                yield r, s, self.score(r, s)

    def top(self, k: int, exclude_edges: bool = True) -> list[tuple[int, int, float]]:
        """The ``k`` highest-scoring pairs; ties broken by ``(r, s)``."""
        g = self.graph
        n = g.num_nodes
        if self.matrix is not None:
            r, s = np.triu_indices(n, k=1)
            vals = self.matrix[r, s]
            if exclude_edges:
                mask = g.adjacency_matrix[r, s].A1 == 0
                r, s, vals = r[mask], s[mask], vals[mask]
            order = np.lexsort((s, r, -vals))[:k]
            return [(int(r[i]), int(s[i]), float(vals[i])) for i in order]
        rows = [t for t in self.items() if not (exclude_edges and g.has_edge(t[0], t[1]))]
        rows.sort(key=lambda t: (-t[2], t[0], t[1]))
        return rows[:k]


def score_all_pairs(
    g: Graph,
    p: PredictorId | str,
    eager: bool = True,
    cap: int | None = DEFAULT_EAGER_CAP,
) -> ScoreTable:
    """Score every unordered pair.

    Eager mode materialises an ``n x n`` matrix and raises
    :class:`CapacityError` above ``cap`` nodes; lazy mode scores pairs as they
    are requested.
    """
    p = PredictorId.parse(p)
    if g.num_nodes < 2:
        raise DomainError("need at least two nodes to score pairs")
    if not eager:
        return ScoreTable(g, p)
    return ScoreTable(g, p, score_matrix(g, p, cap=cap))
