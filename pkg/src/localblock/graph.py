"""Immutable undirected simple graphs and edge-list ingestion.

Node ids are contiguous integers ``0..n-1`` assigned in order of first
appearance in the input, so parsing the same text twice always yields the
same graph.
"""
from __future__ import annotations

import hashlib
import io
import re
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np
import scipy.sparse as sp

__all__ = [
    "DomainError",
    "EdgeListOptions",
    "EmptyGraphError",
    "Graph",
    "GraphParseError",
    "bfs_distances",
    "closed_neighborhood",
    "file_checksum",
    "neighbors",
    "parse_edge_list",
    "read_edge_list",
]

_NODE_HEADER = re.compile(r"^[#%]\s*nodes\s*[:=]?\s*(\d+)\s*$", re.IGNORECASE)


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class GraphParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptyGraphError(GraphParseError):
    pass


@dataclass(frozen=True)
class EdgeListOptions:
    symmetrize: bool = True
    collapse_multi: bool = True
    drop_self_loops: bool = True
    comment_prefixes: tuple[str, ...] = ("#", "%")
    delimiter: str | None = None  # None = any whitespace; "," for CSV-style


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph over nodes ``0..n-1``.

    Build with :meth:`from_edges` or :func:`parse_edge_list`; the constructor
    trusts its inputs.
    """

    adjacency: tuple[frozenset[int], ...]
    edge_count: int
    labels: tuple[str, ...] | None = field(default=None)
    # derived arrays keyed by name; never part of equality
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    @classmethod
    def from_edges(
        cls,
        num_nodes: int,
        edges: Iterable[tuple[int, int]],
        labels: Iterable[str] | None = None,
    ) -> "Graph":
        """Build a graph, silently merging duplicate edges.

        Raises DomainError on self-loops or out-of-range endpoints.
        """
        adj: list[set[int]] = [set() for _ in range(num_nodes)]
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < num_nodes and 0 <= v < num_nodes):
                raise DomainError(f"edge ({u}, {v}) outside 0..{num_nodes - 1}")
            if u == v:
                raise DomainError(f"self-loop at node {u}")
            adj[u].add(v)
            adj[v].add(u)
        m = sum(len(a) for a in adj) // 2
        label_tuple = None
        if labels is not None:
            label_tuple = tuple(str(x) for x in labels)
            if len(label_tuple) != num_nodes:
                raise DomainError("labels must have one entry per node")
        return cls(tuple(frozenset(a) for a in adj), m, label_tuple)

    @property
    def num_nodes(self) -> int:
        return len(self.adjacency)

    @property
    def num_edges(self) -> int:
        return self.edge_count

    def __len__(self) -> int:
        return len(self.adjacency)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.adjacency == other.adjacency and self.labels == other.labels

    def __hash__(self) -> int:
        return hash((self.adjacency, self.labels))

    def __repr__(self) -> str:
        return f"Graph(|V|={self.num_nodes}, |E|={self.edge_count})"

    def check_node(self, u: int) -> int:
        if not isinstance(u, (int, np.integer)) or not 0 <= u < len(self.adjacency):
            raise DomainError(f"invalid node id {u!r} (graph has {len(self.adjacency)} nodes)")
        return int(u)

    def degree(self, u: int) -> int:
        return len(self.adjacency[self.check_node(u)])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency[self.check_node(u)]

    def sorted_neighbors(self, u: int) -> list[int]:
        return sorted(self.adjacency[self.check_node(u)])

    def label(self, u: int) -> str:
        return self.labels[u] if self.labels is not None else str(u)

    def edges(self) -> list[tuple[int, int]]:
        """All edges as ``(u, v)`` with ``u < v``, sorted."""
        return [(u, v) for u in range(self.num_nodes) for v in sorted(self.adjacency[u]) if u < v]

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.fromiter((len(a) for a in self.adjacency), dtype=np.int64, count=self.num_nodes)

    @cached_property
    def edge_array(self) -> np.ndarray:
        """Edges as an ``(m, 2)`` int array, rows ``u < v`` in sorted order."""
        return np.array(self.edges(), dtype=np.int64).reshape(-1, 2)

    @cached_property
    def adjacency_matrix(self) -> sp.csr_matrix:
        """Symmetric 0/1 CSR adjacency matrix (float64)."""
        n = self.num_nodes
        e = self.edge_array
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        data = np.ones(len(rows), dtype=np.float64)
        a = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
        a.sort_indices()
        return a

    def with_edges(self, edges: Iterable[tuple[int, int]]) -> "Graph":
        """Same node set and labels, different edge set."""
        return Graph.from_edges(self.num_nodes, edges, self.labels)

    def relabel(self, perm: Iterable[int]) -> "Graph":
        """Isomorphic copy where node ``u`` becomes ``perm[u]``."""
        perm = list(perm)
        if sorted(perm) != list(range(self.num_nodes)):
            raise DomainError("perm must be a permutation of the node ids")
        labels = None
        if self.labels is not None:
            labels = [""] * self.num_nodes
            for u, p in enumerate(perm):
                labels[p] = self.labels[u]
        return Graph.from_edges(self.num_nodes, ((perm[u], perm[v]) for u, v in self.edges()), labels)

    def to_edge_list(self, sep: str = " ") -> str:
        """Serialize as edge-list text using the original labels."""
        out = io.StringIO()
        for u, v in self.edges():
            out.write(f"{self.label(u)}{sep}{self.label(v)}\n")
        return out.getvalue()


def neighbors(g: Graph, u: int) -> frozenset[int]:
    return g.adjacency[g.check_node(u)]


def closed_neighborhood(g: Graph, u: int) -> frozenset[int]:
    """The degree block centred at ``u``: ``u`` plus its neighbors."""
    return g.adjacency[g.check_node(u)] | {u}


def bfs_distances(g: Graph, u: int) -> dict[int, int]:
    """Hop distances from ``u``; unreachable nodes are absent."""
    u = g.check_node(u)
    dist = {u: 0}
    queue = deque([u])
    adj = g.adjacency
    while queue:
        a = queue.popleft()
        d = dist[a] + 1
        for b in adj[a]:
            if b not in dist:
                dist[b] = d
                queue.append(b)
    return dist


def parse_edge_list(text: str | TextIO, options: EdgeListOptions | None = None) -> Graph:
    """Parse edge-list text into a :class:`Graph`.

    One edge per line as two tokens (a third token, e.g. a weight, is
    ignored). Lines starting with a comment prefix are skipped, except for a
    ``# nodes: N`` header which pads the graph with isolated nodes labelled
    by the unused integers in ``0..N-1``.
    """
    options = options or EdgeListOptions()
    lines = text.splitlines() if isinstance(text, str) else text
    ids: dict[str, int] = {}
    arcs: set[tuple[int, int]] = set()
    edges: list[tuple[int, int]] = []
    declared_nodes: int | None = None

    def node_id(token: str) -> int:
        if token not in ids:
            ids[token] = len(ids)
        return ids[token]

    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith(tuple(options.comment_prefixes)):
            m = _NODE_HEADER.match(line)
            if m:
                declared_nodes = int(m.group(1))
            continue
        if options.delimiter is None:
            tokens = line.split()
        else:
            tokens = [t.strip() for t in line.split(options.delimiter)]
        if len(tokens) < 2 or not tokens[0] or not tokens[1]:
            raise GraphParseError(f"expected at least two tokens, got {raw.rstrip()!r}", lineno)
        u, v = node_id(tokens[0]), node_id(tokens[1])
        if u == v:
            if options.drop_self_loops:
                continue
            raise GraphParseError(f"self-loop on {tokens[0]!r}", lineno)
        if (u, v) in arcs:
            if options.collapse_multi:
                continue
            raise GraphParseError(f"repeated edge {tokens[0]!r} {tokens[1]!r}", lineno)
        arcs.add((u, v))
        if (v, u) in arcs:
            if options.symmetrize:
                continue
            raise GraphParseError(
                f"reverse arc {tokens[0]!r} {tokens[1]!r} in directed input (enable symmetrize)", lineno
            )
        edges.append((u, v) if u < v else (v, u))

    if declared_nodes is not None:
        if declared_nodes < len(ids):
            raise GraphParseError(
                f"header declares {declared_nodes} nodes but {len(ids)} distinct labels appear"
            )
        for i in range(declared_nodes):
            if len(ids) == declared_nodes:
                break
            node_id(str(i))

    if not edges:
        raise EmptyGraphError("no edges left after removing comments, self-loops and duplicates")
    labels = sorted(ids, key=ids.__getitem__)
    return Graph.from_edges(len(labels), edges, labels)


def read_edge_list(path: str | Path, options: EdgeListOptions | None = None) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh, options)


def file_checksum(path: str | Path) -> str:
    """SHA-256 hex digest of a file's bytes."""
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
