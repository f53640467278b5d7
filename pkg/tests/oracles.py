"""Brute-force reference implementations used only by the tests.

Nothing here imports the scoring code under test.
"""
from __future__ import annotations

from itertools import combinations


def build_blocks(n, edges):
    """One block per node: (center, members) built from the raw edge list."""
    members = {u: {u} for u in range(n)}
    for a, b in edges:
        members[a].add(b)
        members[b].add(a)
    return [(u, frozenset(members[u])) for u in range(n)]


def intra_density(center, members, edges):
    """Star edges of the block over the max edge count of its member set."""
    size = len(members)
    star = sum(1 for a, b in edges if center in (a, b) and a in members and b in members)
    return star / (size * (size - 1) / 2)


def inter_edges(x, y, edges):
    """Edges with one endpoint in x and the other in y, either orientation."""
    return sum(1 for a, b in edges if (a in x and b in y) or (a in y and b in x))


def inter_density(x, y, edges):
    return inter_edges(x, y, edges) / (len(x) * len(y))


class BlockOracle:
    """LB scores summed over explicit block pairs.

    Every block density is computed once per graph by enumerating the edge
    list.  For a pair (r, s): r-side blocks contain r, are not centred at r,
    and are not shared; a shared block contains both r and s and is centred
    elsewhere.  Each r-side x s-side block pair adds its inter density and
    each shared block adds its intra density.
    """

    def __init__(self, n, edges):
        self.n = n
        self.edges = [tuple(e) for e in edges]
        self.blocks = build_blocks(n, self.edges)
        self.intra = {}
        self.inter = {}
        for c, m in self.blocks:
            if len(m) > 1:
                self.intra[c] = intra_density(c, m, self.edges)
        for (cx, x), (cy, y) in combinations(self.blocks, 2):
            self.inter[cx, cy] = self.inter[cy, cx] = inter_density(x, y, self.edges)

    def lb(self, r, s):
        def shared(c, mem):
            return r in mem and s in mem and c not in (r, s)

        r_side = [c for c, m in self.blocks if r in m and c != r and not shared(c, m)]
        s_side = [c for c, m in self.blocks if s in m and c != s and not shared(c, m)]
        total = 0.0
        for cx in r_side:
            for cy in s_side:
                if cx != cy:
                    total += self.inter[cx, cy]
        for c, m in self.blocks:
            if shared(c, m):
                total += self.intra[c]
        return total


def lb_oracle(n, edges, r, s):
    return BlockOracle(n, edges).lb(r, s)


def all_pairs(n):
    return list(combinations(range(n), 2))


def auc_bruteforce(pos, neg):
    """Enumerate every positive x negative comparison."""
    wins = ties = 0
    for p in pos:
        for q in neg:
            if p > q:
                wins += 1
            elif p == q:
                ties += 1
    return (wins + 0.5 * ties) / (len(pos) * len(neg))
