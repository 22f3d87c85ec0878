"""Per-industry shares of node classes."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..controllability import ClassificationReport, NodeClass
from ..graph import UNKNOWN_INDUSTRY, ControlDirection, DirectedGraph

__all__ = ["IndustryShares", "IndustryShareReport", "industry_shares"]


@dataclass
class IndustryShares:
    industry: str
    count: int
    counts: dict[str, int]
    shares: dict[str, float]


@dataclass
class IndustryShareReport:
    direction: ControlDirection
    industries: dict[str, IndustryShares] = field(default_factory=dict)

    def __getitem__(self, label: str) -> IndustryShares:
        return self.industries[label]

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("industry,nd_share,nf_share,od_share,count\n")
            for s in self.industries.values():
                fh.write(f"{s.industry},{s.shares['ND']!r},{s.shares['NF']!r},{s.shares['OD']!r},{s.count}\n")


def industry_shares(report: ClassificationReport, graph: DirectedGraph) -> IndustryShareReport:
    """Split class counts by industry; unknown industry goes under ``"unknown"``.

    Industries with no nodes are omitted. Rows follow the scheme order with
    ``unknown`` last.
    """
    if graph.attributes is None:
        raise ValueError("industry shares need node attributes")
    if report.labels.size != graph.n:
        raise ValueError("report and graph node counts differ")
    ind = graph.attributes.industry.astype(np.int64)
    scheme = graph.attributes.scheme
    k = len(scheme)
    slot = np.where(ind == UNKNOWN_INDUSTRY, k, ind)
    table = np.zeros((k + 1, len(NodeClass)), dtype=np.int64)
    np.add.at(table, (slot, report.labels.astype(np.int64)), 1)
    out = IndustryShareReport(report.direction)
    for i in range(k + 1):
        total = int(table[i].sum())
        if total == 0:
            continue
        label = scheme.label(i) if i < k else "unknown"
        counts = {c.code: int(table[i, c]) for c in NodeClass}
        out.industries[label] = IndustryShares(label, total, counts,
                                               {c: v / total for c, v in counts.items()})
    return out
