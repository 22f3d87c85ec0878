"""Network clipping: induced subgraphs on random or largest-capital node fractions."""
from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, field

import numpy as np

from ..controllability import NodeClass, classify_nodes
from ..graph import ControlDirection, DirectedGraph, oriented_view

__all__ = [
    "ClipStrategy",
    "ClipKind",
    "ClipRow",
    "ClipSeriesReport",
    "DEFAULT_FRACTIONS",
    "clip",
    "clip_series",
    "clip_seed",
]

DEFAULT_FRACTIONS = tuple(2.0 ** -k for k in range(6))
CSV_HEADER = ("fraction,strategy,orientation,samples,nodes,mean_k,nd_count_ratio_mean,"
              "nd_count_ratio_sd,nd_capital_ratio_mean,nd_capital_ratio_sd")


class ClipKind(str, enum.Enum):
    RANDOM = "random"
    CAPITAL = "capital"


@dataclass(frozen=True)
class ClipStrategy:
    kind: ClipKind
    sample_count: int = 10
    base_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", ClipKind(self.kind))
        if self.kind is ClipKind.RANDOM and self.sample_count < 1:
            raise ValueError("random clipping needs sample_count >= 1")

    @classmethod
    def random(cls, sample_count: int = 10, base_seed: int = 0) -> "ClipStrategy":
        return cls(ClipKind.RANDOM, sample_count, base_seed)

    @classmethod
    def capital_descending(cls) -> "ClipStrategy":
        return cls(ClipKind.CAPITAL, 1, 0)

    @property
    def samples(self) -> int:
        return self.sample_count if self.kind is ClipKind.RANDOM else 1


def clip_seed(base_seed: int, fraction: float, sample_index: int) -> np.random.SeedSequence:
    """Seed for one random clip; depends only on its own coordinates."""
    bits = struct.unpack("<Q", struct.pack("<d", float(fraction)))[0]
    return np.random.SeedSequence([int(base_seed) & (2**64 - 1), bits, int(sample_index)])


def _kept_count(n: int, fraction: float) -> int:
    return int(round(fraction * n))


def capital_order(graph: DirectedGraph) -> np.ndarray:
    """Node indices by descending capital; unknown capital last, ties by index."""
    if graph.attributes is None:
        raise ValueError("capital-order clipping requires capital attributes")
    cap = graph.attributes.capital
    key = np.where(np.isnan(cap), -np.inf, cap)
    return np.lexsort((np.arange(graph.n), -key))


def clip(graph: DirectedGraph, fraction: float, strategy: ClipStrategy, sample_index: int = 0,
         _order: np.ndarray | None = None) -> DirectedGraph:
    """Induced subgraph on ``round(fraction * N)`` selected nodes."""
    if not 0 < fraction <= 1:
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    keep_n = _kept_count(graph.n, fraction)
    if strategy.kind is ClipKind.CAPITAL:
        order = capital_order(graph) if _order is None else _order
        nodes = order[:keep_n]
    else:
        if keep_n == graph.n:
            return graph
        rng = np.random.default_rng(clip_seed(strategy.base_seed, fraction, sample_index))
        nodes = rng.choice(graph.n, size=keep_n, replace=False)
    if keep_n == graph.n:
        return graph
    return graph.subgraph(nodes)


@dataclass
class ClipRow:
    fraction: float
    nodes: int
    samples: int
    mean_k: float
    nd_count_ratio_mean: float
    nd_count_ratio_sd: float
    nd_capital_ratio_mean: float | None
    nd_capital_ratio_sd: float | None
    driver_ratio_mean: float


@dataclass
class ClipSeriesReport:
    strategy: ClipStrategy
    direction: ControlDirection
    rows: list[ClipRow] = field(default_factory=list)

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(CSV_HEADER + "\n")
            for r in self.rows:
                fh.write(",".join([
                    repr(r.fraction), self.strategy.kind.value, self.direction.value,
                    str(r.samples), str(r.nodes), repr(r.mean_k),
                    repr(r.nd_count_ratio_mean), repr(r.nd_count_ratio_sd),
                    _fmt(r.nd_capital_ratio_mean), _fmt(r.nd_capital_ratio_sd),
                ]) + "\n")


def _fmt(x: float | None) -> str:
    return "" if x is None else repr(x)


def _sd(xs: list[float]) -> float:
    return float(np.std(xs, ddof=1)) if len(xs) > 1 else 0.0


def _nd_ratios(sub: DirectedGraph, direction: ControlDirection) -> tuple[float, float | None, float]:
    rep = classify_nodes(oriented_view(sub, direction))
    nd = rep.labels == NodeClass.NECESSARY_DRIVER
    count_ratio = float(nd.sum()) / sub.n
    cap_ratio = None
    if sub.attributes is not None:
        cap = sub.attributes.capital
        known = ~np.isnan(cap)
        total = cap[known].sum()
        if total > 0:
            cap_ratio = float(cap[known & nd].sum() / total)
    return count_ratio, cap_ratio, rep.driver_count / sub.n


def clip_series(
    graph: DirectedGraph,
    direction: ControlDirection | str,
    strategy: ClipStrategy,
    fractions=DEFAULT_FRACTIONS,
) -> ClipSeriesReport:
    """Classify clipped networks at each fraction and aggregate necessary-driver ratios.

    ``graph`` is taken in stored (supplier -> client) orientation; ``direction``
    picks the analysis applied to every clipped subgraph.
    """
    direction = ControlDirection.parse(direction)
    if graph.reversed_:
        graph = graph.reverse()
    order = capital_order(graph) if strategy.kind is ClipKind.CAPITAL else None
    report = ClipSeriesReport(strategy, direction)
    for f in fractions:
        f = float(f)
        counts, caps, drivers, degs = [], [], [], []
        # at full size every random sample is the graph itself
        draws = 1 if _kept_count(graph.n, f) == graph.n else strategy.samples
        for i in range(draws):
            sub = clip(graph, f, strategy, i, _order=order)
            if sub.n == 0:
                raise ValueError(f"fraction {f} keeps no nodes")
            c, k, d = _nd_ratios(sub, direction)
            counts.append(c)
            caps.append(k)
            drivers.append(d)
            degs.append(2.0 * sub.edge_count / sub.n)
        have_cap = all(k is not None for k in caps)
        report.rows.append(ClipRow(
            fraction=f,
            nodes=_kept_count(graph.n, f),
            samples=strategy.samples,
            mean_k=float(np.mean(degs)),
            nd_count_ratio_mean=float(np.mean(counts)),
            nd_count_ratio_sd=_sd(counts),
            nd_capital_ratio_mean=float(np.mean(caps)) if have_cap else None,
            nd_capital_ratio_sd=_sd(caps) if have_cap else None,
            driver_ratio_mean=float(np.mean(drivers)),
        ))
    return report
