"""
Bipartite split of a directed graph and Hopcroft-Karp maximum matching.

Every node ``v`` gets an out-copy ``u(v)`` and an in-copy ``w(v)``; a directed
edge ``s -> t`` becomes the bipartite edge ``u(s) - w(t)``. The split is never
materialised: the graph's CSR indexes already are its two adjacency lists.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba as nb
import numpy as np

from .graph import DirectedGraph

__all__ = [
    "BipartiteSplit",
    "Matching",
    "split_bipartite",
    "maximum_matching",
    "minimum_driver_count",
    "has_augmenting_path",
    "is_valid_matching",
]

UNMATCHED = -1


@dataclass(frozen=True, eq=False)
class BipartiteSplit:
    n: int
    # w(v) -> list of u(s) for edges s -> v
    w_indptr: np.ndarray
    w_indices: np.ndarray
    # u(v) -> list of w(t) for edges v -> t
    u_indptr: np.ndarray
    u_indices: np.ndarray

    @property
    def edge_count(self) -> int:
        return int(self.w_indices.size)

    def w_degree(self) -> np.ndarray:
        return np.diff(self.w_indptr)

    def edges(self) -> list[tuple[int, int]]:
        """Bipartite edges as ``(u_index, w_index)`` pairs."""
        out = []
        for u in range(self.n):
            for w in self.u_indices[self.u_indptr[u]:self.u_indptr[u + 1]].tolist():
                out.append((u, w))
        return out


@dataclass(frozen=True, eq=False)
class Matching:
    """``match_w[w]`` is the out-copy paired with in-copy ``w`` (or -1); ``match_u`` is the inverse."""

    match_w: np.ndarray
    match_u: np.ndarray

    @property
    def size(self) -> int:
        return int((self.match_w != UNMATCHED).sum())

    def exposed_w(self) -> np.ndarray:
        return np.flatnonzero(self.match_w == UNMATCHED)

    def pairs(self) -> list[tuple[int, int]]:
        """Matched ``(u, w)`` pairs ordered by ``w``."""
        w = np.flatnonzero(self.match_w != UNMATCHED)
        return list(zip(self.match_w[w].tolist(), w.tolist()))


def split_bipartite(graph: DirectedGraph) -> BipartiteSplit:
    return BipartiteSplit(graph.n, graph.in_indptr, graph.in_indices,
                          graph.out_indptr, graph.out_indices)


@nb.njit(cache=True)
def _greedy(n, indptr, indices, match_w, match_u):
    for w in range(n):
        for k in range(indptr[w], indptr[w + 1]):
            u = indices[k]
            if match_u[u] == -1:
                match_u[u] = w
                match_w[w] = u
                break


@nb.njit(cache=True)
def _hopcroft_karp(n, indptr, indices, match_w, match_u):
    # Searches run from the W side: indptr/indices map w -> neighbouring u.
    inf = np.iinfo(np.int64).max
    dist = np.empty(n, np.int64)
    queue = np.empty(n, np.int64)
    cursor = np.empty(n, np.int64)
    stack = np.empty(n + 1, np.int64)
    while True:
        head = 0
        tail = 0
        for w in range(n):
            if match_w[w] == -1 and indptr[w] < indptr[w + 1]:
                dist[w] = 0
                queue[tail] = w
                tail += 1
            else:
                dist[w] = inf
        limit = inf
        while head < tail:
            w = queue[head]
            head += 1
            if dist[w] >= limit:
                continue
            for k in range(indptr[w], indptr[w + 1]):
                w2 = match_u[indices[k]]
                if w2 == -1:
                    if limit == inf:
                        limit = dist[w] + 1
                elif dist[w2] == inf:
                    dist[w2] = dist[w] + 1
                    queue[tail] = w2
                    tail += 1
        if limit == inf:
            break

        for w in range(n):
            cursor[w] = indptr[w]
        for w0 in range(n):
            if match_w[w0] != -1 or dist[w0] != 0:
                continue
            top = 0
            stack[0] = w0
            while top >= 0:
                w = stack[top]
                pushed = False
                while cursor[w] < indptr[w + 1]:
                    u = indices[cursor[w]]
                    w2 = match_u[u]
                    if w2 == -1:
                        if dist[w] + 1 == limit:
                            for i in range(top, -1, -1):
                                ww = stack[i]
                                uu = indices[cursor[ww]]
                                match_u[uu] = ww
                                match_w[ww] = uu
                                dist[ww] = inf
                            top = -1
                            pushed = True
                            break
                    elif dist[w2] == dist[w] + 1:
                        top += 1
                        stack[top] = w2
                        pushed = True
                        break
                    cursor[w] += 1
                if not pushed:
                    dist[w] = inf
                    top -= 1
                    if top >= 0:
                        cursor[stack[top]] += 1


def maximum_matching(split: BipartiteSplit) -> Matching:
    """Maximum-cardinality matching of the split.

    Greedy initialisation followed by Hopcroft-Karp phases; adjacency is
    scanned in ascending index order, so the result is reproducible.
    """
    match_w = np.full(split.n, UNMATCHED, dtype=np.int64)
    match_u = np.full(split.n, UNMATCHED, dtype=np.int64)
    if split.n and split.edge_count:
        _greedy(split.n, split.w_indptr, split.w_indices, match_w, match_u)
        _hopcroft_karp(split.n, split.w_indptr, split.w_indices, match_w, match_u)
    return Matching(match_w, match_u)


def minimum_driver_count(graph: DirectedGraph) -> int:
    """Fewest independent inputs that structurally control ``graph``: ``max(N - |M*|, 1)``."""
    if graph.n < 1:
        raise ValueError("graph has no nodes")
    m = maximum_matching(split_bipartite(graph))
    return max(graph.n - m.size, 1)


def is_valid_matching(split: BipartiteSplit, matching: Matching) -> bool:
    """Every pair is a split edge and both maps are mutually inverse."""
    mw, mu = matching.match_w, matching.match_u
    if mw.shape != (split.n,) or mu.shape != (split.n,):
        return False
    for w in range(split.n):
        u = int(mw[w])
        if u == UNMATCHED:
            continue
        if mu[u] != w:
            return False
        nbrs = split.w_indices[split.w_indptr[w]:split.w_indptr[w + 1]]
        if u not in nbrs:
            return False
    return int((mu != UNMATCHED).sum()) == int((mw != UNMATCHED).sum())


@nb.njit(cache=True)
def _reaches_exposed_u(n, indptr, indices, match_w, match_u):
    seen_w = np.zeros(n, np.bool_)
    seen_u = np.zeros(n, np.bool_)
    queue = np.empty(n, np.int64)
    tail = 0
    for w in range(n):
        if match_w[w] == -1:
            seen_w[w] = True
            queue[tail] = w
            tail += 1
    head = 0
    while head < tail:
        w = queue[head]
        head += 1
        for k in range(indptr[w], indptr[w + 1]):
            u = indices[k]
            if seen_u[u] or match_w[w] == u:
                continue
            seen_u[u] = True
            w2 = match_u[u]
            if w2 == -1:
                return True
            if not seen_w[w2]:
                seen_w[w2] = True
                queue[tail] = w2
                tail += 1
    return False


def has_augmenting_path(split: BipartiteSplit, matching: Matching) -> bool:
    """Alternating BFS from every exposed in-copy; True if an exposed out-copy is reachable."""
    return bool(_reaches_exposed_u(split.n, split.w_indptr, split.w_indices,
                                   matching.match_w, matching.match_u))


def write_matching_csv(graph: DirectedGraph, matching: Matching, path) -> None:
    """Debug dump ``node_id,matched_parent_id`` (empty parent when unmatched)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("node_id,matched_parent_id\n")
        for w in range(graph.n):
            u = int(matching.match_w[w])
            fh.write(f"{graph.node_id(w)},{graph.node_id(u) if u != UNMATCHED else ''}\n")
