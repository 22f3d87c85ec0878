"""
Kalman rank check of a driver set over a prime field.

Nonzero entries of ``A`` get uniform random weights in ``[1, p-1]``; the
controllability matrix ``(B, AB, ..., A^{N-1}B)`` is grown one Krylov vector
at a time and reduced against an echelon basis, so the run stops as soon as
rank ``N`` is reached or the Krylov space closes.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Iterable

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .graph import DirectedGraph

__all__ = [
    "WeightedSystem",
    "Certificate",
    "build_system",
    "controllability_rank",
    "verify_driver_set",
    "unreachable_cycle_roots",
    "DEFAULT_MODULUS",
    "DEFAULT_MAX_NODES",
]

DEFAULT_MODULUS = 2**31 - 1
DEFAULT_MAX_NODES = 64


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if p % q == 0:
            return p == q
    d, s = p - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, p)
        if x in (1, p - 1):
            continue
        for _ in range(s - 1):
            x = x * x % p
            if x == p - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True, eq=False)
class WeightedSystem:
    """``dx/dt = A x + B u`` over GF(p).

    ``A`` is a coordinate list, ``a[rows[k], cols[k]] = weights[k]``, one entry
    per oriented edge ``cols[k] -> rows[k]``. ``B`` is likewise
    ``b[b_rows[k], b_cols[k]] = b_weights[k]`` with ``inputs`` columns; input
    ``j`` enters at ``drivers[j]`` with weight 1, and any ``attached`` nodes
    are fed by input 0.
    """

    n: int
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray
    drivers: np.ndarray
    attached: np.ndarray
    b_rows: np.ndarray
    b_cols: np.ndarray
    b_weights: np.ndarray
    modulus: int

    @property
    def inputs(self) -> int:
        return int(self.drivers.size)

    def dense_a(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.int64)
        a[self.rows, self.cols] = self.weights
        return a

    def dense_b(self) -> np.ndarray:
        b = np.zeros((self.n, self.inputs), dtype=np.int64)
        b[self.b_rows, self.b_cols] = self.b_weights
        return b

    def apply_a(self, x: np.ndarray) -> np.ndarray:
        p = self.modulus
        out = np.zeros(self.n, dtype=np.int64)
        # weights, x < 2^31, so each product < 2^62; reduce before accumulating
        np.add.at(out, self.rows, (self.weights * x[self.cols]) % p)
        return out % p


@dataclass
class Certificate:
    verdict: str
    trials: int
    rank: int
    n: int
    drivers: list[str]
    attached: list[str]
    modulus: int
    seed: int

    @property
    def controllable(self) -> bool:
        return self.verdict == "Controllable"

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def _reachable(graph: DirectedGraph, sources: Iterable[int]) -> np.ndarray:
    seen = np.zeros(graph.n, dtype=bool)
    stack = list(sources)
    seen[stack] = True
    while stack:
        v = stack.pop()
        for w in graph.successors(v).tolist():
            if not seen[w]:
                seen[w] = True
                stack.append(w)
    return seen


def unreachable_cycle_roots(graph: DirectedGraph, drivers: Iterable[int]) -> list[int]:
    """One node (lowest index) per strongly connected cluster of >= 2 nodes that
    the drivers cannot reach and that no other unreachable cluster feeds.

    Feeding these from an existing input makes every node reachable except
    those stranded behind a node with no incoming link.
    """
    drivers = list(drivers)
    roots: list[int] = []
    seen = _reachable(graph, drivers)
    while not seen.all():
        rest = np.flatnonzero(~seen)
        sub = graph.subgraph(rest)
        adj = csr_matrix((np.ones(sub.edge_count), sub.out_indices, sub.out_indptr), shape=(sub.n, sub.n))
        k, comp = connected_components(adj, directed=True, connection="strong")
        s, t = sub.edges()
        fed = np.zeros(k, dtype=bool)
        fed[comp[t][comp[s] != comp[t]]] = True
        sizes = np.bincount(comp, minlength=k)
        new = [int(rest[np.flatnonzero(comp == c)[0]]) for c in range(k) if not fed[c] and sizes[c] > 1]
        if not new:
            break
        roots.extend(new)
        seen = _reachable(graph, drivers + roots)
    return sorted(roots)


def build_system(
    graph: DirectedGraph,
    drivers: Iterable[int],
    seed: int | np.random.Generator = 0,
    modulus: int = DEFAULT_MODULUS,
    max_nodes: int = DEFAULT_MAX_NODES,
    attach_cycles: bool = True,
) -> WeightedSystem:
    """Randomly weighted system on the oriented graph with one input per driver.

    With ``attach_cycles`` the first input also feeds one node of every
    cycle cluster the drivers cannot reach (see :func:`unreachable_cycle_roots`);
    without it every input column has exactly one nonzero.
    """
    if graph.n > max_nodes:
        raise ValueError(f"verification capped at {max_nodes} nodes, graph has {graph.n}")
    drv = np.unique(np.asarray(list(drivers), dtype=np.int64))
    if drv.size == 0:
        raise ValueError("driver set is empty")
    if drv.min() < 0 or drv.max() >= graph.n:
        raise ValueError("driver index out of range")
    if not _is_prime(modulus):
        raise ValueError(f"modulus {modulus} is not prime")
    if modulus <= max(graph.n, 1) ** 2:
        raise ValueError("modulus must exceed N^2")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    src, dst = graph.edges()
    weights = rng.integers(1, modulus, size=src.size, dtype=np.int64)
    attached = np.asarray(unreachable_cycle_roots(graph, drv.tolist()) if attach_cycles else [],
                          dtype=np.int64)
    b_rows = np.concatenate([drv, attached])
    b_cols = np.concatenate([np.arange(drv.size, dtype=np.int64), np.zeros(attached.size, dtype=np.int64)])
    b_weights = np.concatenate([np.ones(drv.size, dtype=np.int64),
                                rng.integers(1, modulus, size=attached.size, dtype=np.int64)])
    return WeightedSystem(graph.n, dst, src, weights, drv, attached, b_rows, b_cols, b_weights, modulus)


def controllability_rank(system: WeightedSystem) -> int:
    """Rank over GF(p) of ``(B, AB, ..., A^{N-1}B)``."""
    n, p = system.n, system.modulus
    basis: dict[int, np.ndarray] = {}  # pivot -> row, 1 at its pivot and 0 at every other pivot

    def reduce(v: np.ndarray) -> bool:
        v = v % p
        for piv, row in basis.items():
            c = v[piv]
            if c:
                v = (v - c * row) % p
        nz = np.flatnonzero(v)
        if nz.size == 0:
            return False
        piv = int(nz[0])
        v = (v * pow(int(v[piv]), p - 2, p)) % p
        for q, row in basis.items():
            c = row[piv]
            if c:
                basis[q] = (row - c * v) % p
        basis[piv] = v
        return True

    frontier = [col for col in system.dense_b().T.copy()]
    for _ in range(n):
        survivors = []
        for vec in frontier:
            if reduce(vec):
                survivors.append(vec)
            if len(basis) == n:
                return n
        # a Krylov vector already in the span stays there under A
        if not survivors:
            break
        frontier = [system.apply_a(v) for v in survivors]
    return len(basis)


def verify_driver_set(
    graph: DirectedGraph,
    drivers: Iterable[int],
    trials: int = 3,
    seed: int = 0,
    modulus: int = DEFAULT_MODULUS,
    max_nodes: int = DEFAULT_MAX_NODES,
    attach_cycles: bool = True,
) -> Certificate:
    """Repeat the rank test with fresh weights until full rank or ``trials`` are used up."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    drivers = list(drivers)
    best = 0
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        system = build_system(graph, drivers, rng, modulus, max_nodes, attach_cycles)
        r = controllability_rank(system)
        best = max(best, r)
        if r == graph.n:
            break
    ids = [graph.node_id(d) for d in system.drivers.tolist()]
    att = [graph.node_id(d) for d in system.attached.tolist()]
    verdict = "Controllable" if best == graph.n else "NotControllableAtTrials"
    return Certificate(verdict, t + 1, best, graph.n, ids, att, modulus, seed)
