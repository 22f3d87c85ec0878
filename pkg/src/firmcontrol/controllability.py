"""
Node roles in structural control.

Given one maximum matching, an in-copy ``w(v)`` can be left unmatched by some
maximum matching iff it is exposed or reachable from an exposed in-copy by an
even alternating path. That single multi-source BFS yields the three-way
labelling:

* necessary driver: ``v`` has no incoming link (``w(v)`` isolated);
* ordinary: ``w(v)`` is exposed in some but not every maximum matching;
* necessary follower: ``w(v)`` is matched in every maximum matching.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .graph import ControlDirection, DirectedGraph
from .matching import Matching, maximum_matching, split_bipartite

__all__ = [
    "NodeClass",
    "ClassificationReport",
    "classify_nodes",
    "extract_driver_set",
    "oracle_classify",
    "enumerate_maximum_matchings",
    "OracleSizeError",
]

ORACLE_MAX_NODES = 12


class NodeClass(enum.IntEnum):
    NECESSARY_DRIVER = 0
    NECESSARY_FOLLOWER = 1
    ORDINARY = 2

    @property
    def code(self) -> str:
        return _CODES[self]


_CODES = {NodeClass.NECESSARY_DRIVER: "ND", NodeClass.NECESSARY_FOLLOWER: "NF", NodeClass.ORDINARY: "OD"}


class OracleSizeError(ValueError):
    pass


@dataclass(eq=False)
class ClassificationReport:
    labels: np.ndarray
    direction: ControlDirection
    driver_count: int
    counts: dict[str, int] = field(default_factory=dict)
    shares: dict[str, float] = field(default_factory=dict)
    capital_shares: dict[str, float] | None = None
    total_known_capital: float | None = None
    unknown_capital_nodes: int = 0

    @property
    def n(self) -> int:
        return int(self.labels.size)

    def members(self, cls: NodeClass) -> np.ndarray:
        return np.flatnonzero(self.labels == cls)

    def summary(self) -> dict:
        return {
            "orientation": self.direction.value,
            "nodes": self.n,
            "driver_count": self.driver_count,
            "counts": self.counts,
            "shares": self.shares,
            "capital_shares": self.capital_shares,
            "total_known_capital": self.total_known_capital,
            "unknown_capital_nodes": self.unknown_capital_nodes,
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)

    def write_csv(self, graph: DirectedGraph, path) -> None:
        codes = [c.code for c in NodeClass]
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("node_id,class\n")
            for v, lab in enumerate(self.labels.tolist()):
                fh.write(f"{graph.node_id(v)},{codes[lab]}\n")


def _build_report(graph: DirectedGraph, labels: np.ndarray, driver_count: int) -> ClassificationReport:
    n = labels.size
    counts = {c.code: int((labels == c).sum()) for c in NodeClass}
    rep = ClassificationReport(
        labels=labels,
        direction=graph.direction,
        driver_count=driver_count,
        counts=counts,
        shares={k: v / n for k, v in counts.items()},
    )
    if graph.attributes is not None:
        cap = graph.attributes.capital
        known = ~np.isnan(cap)
        total = float(cap[known].sum())
        rep.total_known_capital = total
        rep.unknown_capital_nodes = int(n - known.sum())
        if total > 0:
            rep.capital_shares = {
                c.code: float(cap[known & (labels == c)].sum()) / total for c in NodeClass
            }
    return rep


@nb.njit(cache=True)
def _maybe_exposed(n, indptr, indices, match_w, match_u):
    # even alternating reachability from exposed in-copies
    mark = np.zeros(n, np.bool_)
    queue = np.empty(n, np.int64)
    tail = 0
    for w in range(n):
        if match_w[w] == -1:
            mark[w] = True
            queue[tail] = w
            tail += 1
    head = 0
    while head < tail:
        w = queue[head]
        head += 1
        mine = match_w[w]
        for k in range(indptr[w], indptr[w + 1]):
            u = indices[k]
            if u == mine:
                continue
            w2 = match_u[u]
            if w2 != -1 and not mark[w2]:
                mark[w2] = True
                queue[tail] = w2
                tail += 1
    return mark


def _labels_from_matching(graph: DirectedGraph, matching: Matching) -> np.ndarray:
    n = graph.n
    if matching.size == n:
        return np.full(n, NodeClass.ORDINARY, dtype=np.int8)
    mark = _maybe_exposed(n, graph.in_indptr, graph.in_indices, matching.match_w, matching.match_u)
    labels = np.where(mark, np.int8(NodeClass.ORDINARY), np.int8(NodeClass.NECESSARY_FOLLOWER)).astype(np.int8)
    labels[graph.in_degree() == 0] = NodeClass.NECESSARY_DRIVER
    return labels


def classify_nodes(graph: DirectedGraph, matching: Matching | None = None) -> ClassificationReport:
    """Label every node of the (already oriented) graph.

    A perfect matching means one input placed anywhere suffices, so all nodes
    are ordinary.
    """
    if graph.n < 1:
        raise ValueError("graph has no nodes")
    if matching is None:
        matching = maximum_matching(split_bipartite(graph))
    labels = _labels_from_matching(graph, matching)
    return _build_report(graph, labels, max(graph.n - matching.size, 1))


def extract_driver_set(graph: DirectedGraph, matching: Matching | None = None) -> np.ndarray:
    """One minimum driver set as sorted dense indices (exposed in-copies of the matching)."""
    if graph.n < 1:
        raise ValueError("graph has no nodes")
    if matching is None:
        matching = maximum_matching(split_bipartite(graph))
    drivers = matching.exposed_w()
    if drivers.size == 0:
        return np.array([0], dtype=np.int64)
    return drivers


def enumerate_maximum_matchings(graph: DirectedGraph) -> tuple[int, list[int]]:
    """Exhaustively list every maximum matching of the split.

    Returns the maximum size and, for each maximum matching, the bitmask of
    exposed in-copies. Exponential; meant for tiny graphs only.
    """
    n = graph.n
    preds = [graph.predecessors(w).tolist() for w in range(n)]
    best = -1
    exposed_masks: list[int] = []

    def rec(w: int, used: int, size: int, exposed: int) -> None:
        nonlocal best, exposed_masks
        if size + (n - w) < best:
            return
        if w == n:
            if size > best:
                best = size
                exposed_masks = [exposed]
            elif size == best:
                exposed_masks.append(exposed)
            return
        for u in preds[w]:
            if not used >> u & 1:
                rec(w + 1, used | (1 << u), size + 1, exposed)
        rec(w + 1, used, size, exposed | (1 << w))

    rec(0, 0, 0, 0)
    return best, exposed_masks


def oracle_classify(graph: DirectedGraph) -> ClassificationReport:
    """Reference labelling by enumerating all maximum matchings (``N <= 12``)."""
    n = graph.n
    if n < 1:
        raise ValueError("graph has no nodes")
    if n > ORACLE_MAX_NODES:
        raise OracleSizeError(f"oracle limited to {ORACLE_MAX_NODES} nodes, got {n}")
    best, masks = enumerate_maximum_matchings(graph)
    labels = np.empty(n, dtype=np.int8)
    if best == n:
        labels[:] = NodeClass.ORDINARY
    else:
        always = ~0
        ever = 0
        for m in masks:
            always &= m
            ever |= m
        for v in range(n):
            if always >> v & 1:
                labels[v] = NodeClass.NECESSARY_DRIVER
            elif not ever >> v & 1:
                labels[v] = NodeClass.NECESSARY_FOLLOWER
            else:
                labels[v] = NodeClass.ORDINARY
    return _build_report(graph, labels, max(n - best, 1))
