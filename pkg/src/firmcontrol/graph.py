"""
Directed firm networks: ingestion, attribute join and control orientation.

Edges are stored once, in goods-flow orientation (supplier -> client), as a
pair of CSR indexes (forward and reverse). A demand-side analysis looks at
the same storage through a reversed view.
"""
from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ControlDirection",
    "DirectedGraph",
    "EdgeListFormat",
    "FirmTable",
    "IndustryScheme",
    "IngestionReport",
    "AttributeReport",
    "GraphFormatError",
    "DEFAULT_INDUSTRIES",
    "UNKNOWN_INDUSTRY",
    "load_edges",
    "load_attributes",
    "oriented_view",
]

UNKNOWN_INDUSTRY = -1


class GraphFormatError(ValueError):
    """Raised for unreadable or malformed edge/attribute input."""


class ControlDirection(str, enum.Enum):
    SUPPLY = "supply"
    DEMAND = "demand"

    @classmethod
    def parse(cls, value: "str | ControlDirection") -> "ControlDirection":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown control direction {value!r}; expected 'supply' or 'demand'") from None


@dataclass(frozen=True)
class IndustryScheme:
    """Closed set of industry divisions, addressable by code or label."""

    codes: tuple[str, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.codes) != len(self.labels):
            raise ValueError("codes and labels must have equal length")
        keys = [c.lower() for c in self.codes] + [lab.lower() for lab in self.labels]
        if len(set(keys)) != len(keys):
            raise ValueError("industry codes/labels must be unique")

    def __len__(self) -> int:
        return len(self.labels)

    def lookup(self, token: str) -> int:
        """Return the division index for a code or label (case-insensitive)."""
        key = token.strip().lower()
        for i, (c, lab) in enumerate(zip(self.codes, self.labels)):
            if key == c.lower() or key == lab.lower():
                return i
        raise KeyError(token)

    def label(self, index: int) -> str:
        if index == UNKNOWN_INDUSTRY:
            return "unknown"
        return self.labels[index]

    @classmethod
    def generic(cls, count: int) -> "IndustryScheme":
        """Anonymous scheme ``ind00..ind{count-1}``; the default scheme when ``count`` fits."""
        if count <= len(DEFAULT_INDUSTRIES):
            return IndustryScheme(DEFAULT_INDUSTRIES.codes[:count], DEFAULT_INDUSTRIES.labels[:count])
        names = tuple(f"ind{i:02d}" for i in range(count))
        return IndustryScheme(tuple(f"X{i:02d}" for i in range(count)), names)


# Japan Standard Industrial Classification divisions A-R, with I split into
# wholesale and retail; S (government) and T (unclassifiable) omitted.
DEFAULT_INDUSTRIES = IndustryScheme(
    codes=("A", "B", "C", "D", "E", "F", "G", "H", "I1", "I2",
           "J", "K", "L", "M", "N", "O", "P", "Q", "R"),
    labels=(
        "agriculture_forestry",
        "fisheries",
        "mining",
        "construction",
        "manufacturing",
        "electricity_gas",
        "information_communications",
        "transport_postal",
        "wholesale",
        "retail",
        "finance_insurance",
        "real_estate",
        "academic_research",
        "accommodation_food",
        "living_services",
        "education",
        "medical_welfare",
        "compound_services",
        "other_services",
    ),
)


@dataclass(frozen=True, eq=False)
class FirmTable:
    """Per-node capital and industry.

    ``capital`` is NaN where unknown; ``industry`` is ``UNKNOWN_INDUSTRY`` where
    unknown. Both are indexed by dense node index.
    """

    capital: np.ndarray
    industry: np.ndarray
    scheme: IndustryScheme = DEFAULT_INDUSTRIES

    @property
    def known_capital(self) -> np.ndarray:
        return ~np.isnan(self.capital)

    def take(self, nodes: np.ndarray) -> "FirmTable":
        return FirmTable(self.capital[nodes], self.industry[nodes], self.scheme)


@dataclass
class IngestionReport:
    nodes: int = 0
    edges: int = 0
    records: int = 0
    duplicates_dropped: int = 0
    self_loops_dropped: int = 0
    header_skipped: bool = False

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


@dataclass
class AttributeReport:
    rows: int = 0
    matched: int = 0
    unmatched_rows: int = 0
    nodes_without_row: int = 0
    unknown_capital: int = 0
    unknown_industry: int = 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


@dataclass(frozen=True)
class EdgeListFormat:
    sep: str = ","
    header: bool = False
    encoding: str = "utf-8"


def _csr(n: int, rows: np.ndarray, cols: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # rows must already be sorted (stable) so column order inside a row is preserved
    counts = np.bincount(rows, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, np.ascontiguousarray(cols, dtype=np.int64)


class DirectedGraph:
    """Immutable directed graph on dense node indices ``0..N-1``.

    ``out_indptr/out_indices`` list, for every node, its successors sorted by
    index; ``in_indptr/in_indices`` list its predecessors, also sorted. A view
    produced by :meth:`reverse` swaps the two indexes without copying.
    """

    __slots__ = ("n", "out_indptr", "out_indices", "in_indptr", "in_indices",
                 "_ids", "_index", "attributes", "reversed_", "report")

    def __init__(self, n, out_indptr, out_indices, in_indptr, in_indices, *,
                 ids=None, attributes=None, reversed_=False, report=None, _index=None):
        self.n = int(n)
        self.out_indptr = out_indptr
        self.out_indices = out_indices
        self.in_indptr = in_indptr
        self.in_indices = in_indices
        self._ids = ids
        self._index = _index
        self.attributes: FirmTable | None = attributes
        self.reversed_ = reversed_
        self.report: IngestionReport | None = report
        for a in (out_indptr, out_indices, in_indptr, in_indices):
            a.setflags(write=False)

    # construction

    @classmethod
    def from_edges(
        cls,
        n: int,
        sources: Iterable[int] | np.ndarray,
        targets: Iterable[int] | np.ndarray,
        *,
        ids: Sequence[str] | None = None,
        attributes: FirmTable | None = None,
        report: IngestionReport | None = None,
    ) -> "DirectedGraph":
        """Build from parallel source/target index arrays.

        Self-loops and duplicate edges are dropped; the counts land in the
        returned graph's :attr:`report`.
        """
        src = np.asarray(sources, dtype=np.int64).ravel()
        dst = np.asarray(targets, dtype=np.int64).ravel()
        if src.shape != dst.shape:
            raise ValueError("sources and targets differ in length")
        if n < 0:
            raise ValueError("negative node count")
        if src.size and (src.min() < 0 or dst.min() < 0 or src.max() >= n or dst.max() >= n):
            raise ValueError("edge endpoint out of range")
        if ids is not None and len(ids) != n:
            raise ValueError("ids length must equal n")
        report = report if report is not None else IngestionReport(records=int(src.size))

        loops = src == dst
        report.self_loops_dropped += int(loops.sum())
        src, dst = src[~loops], dst[~loops]
        codes = np.unique(src * max(n, 1) + dst)
        report.duplicates_dropped += int(src.size - codes.size)
        src, dst = np.divmod(codes, max(n, 1))

        out_indptr, out_indices = _csr(n, src, dst)
        order = np.argsort(dst, kind="stable")
        in_indptr, in_indices = _csr(n, dst[order], src[order])
        report.nodes = n
        report.edges = int(codes.size)
        return cls(n, out_indptr, out_indices, in_indptr, in_indices,
                   ids=list(ids) if ids is not None else None,
                   attributes=attributes, report=report)

    # views

    def reverse(self) -> "DirectedGraph":
        """Edge-reversed view sharing storage with ``self``."""
        return DirectedGraph(self.n, self.in_indptr, self.in_indices,
                             self.out_indptr, self.out_indices,
                             ids=self._ids, attributes=self.attributes,
                             reversed_=not self.reversed_, report=self.report,
                             _index=self._index)

    def with_attributes(self, attributes: FirmTable | None) -> "DirectedGraph":
        return DirectedGraph(self.n, self.out_indptr, self.out_indices,
                             self.in_indptr, self.in_indices,
                             ids=self._ids, attributes=attributes,
                             reversed_=self.reversed_, report=self.report,
                             _index=self._index)

    @property
    def direction(self) -> ControlDirection:
        return ControlDirection.DEMAND if self.reversed_ else ControlDirection.SUPPLY

    # queries

    @property
    def edge_count(self) -> int:
        return int(self.out_indices.size)

    def in_degree(self) -> np.ndarray:
        return np.diff(self.in_indptr)

    def out_degree(self) -> np.ndarray:
        return np.diff(self.out_indptr)

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """(sources, targets) in this view's orientation, sorted by (source, target)."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.out_indptr))
        return src, np.asarray(self.out_indices)

    def edge_set(self) -> set[tuple[int, int]]:
        s, t = self.edges()
        return set(zip(s.tolist(), t.tolist()))

    def successors(self, v: int) -> np.ndarray:
        return self.out_indices[self.out_indptr[v]:self.out_indptr[v + 1]]

    def predecessors(self, v: int) -> np.ndarray:
        return self.in_indices[self.in_indptr[v]:self.in_indptr[v + 1]]

    def node_id(self, v: int) -> str:
        return self._ids[v] if self._ids is not None else str(v)

    @property
    def ids(self) -> list[str]:
        if self._ids is None:
            return [str(i) for i in range(self.n)]
        return self._ids

    def index_of(self, node_id: str) -> int:
        if self._index is None:
            self._index = {v: i for i, v in enumerate(self.ids)}
        return self._index[node_id]

    def subgraph(self, nodes: np.ndarray) -> "DirectedGraph":
        """Induced subgraph on ``nodes``, relabelled in ascending index order.

        The result keeps this view's orientation.
        """
        base = self.reverse() if self.reversed_ else self
        keep = np.unique(np.asarray(nodes, dtype=np.int64))
        remap = np.full(self.n, -1, dtype=np.int64)
        remap[keep] = np.arange(keep.size, dtype=np.int64)
        s, t = base.edges()
        ms, mt = remap[s], remap[t]
        mask = (ms >= 0) & (mt >= 0)
        ids = [base.ids[i] for i in keep.tolist()]
        attrs = self.attributes.take(keep) if self.attributes is not None else None
        sub = DirectedGraph.from_edges(keep.size, ms[mask], mt[mask], ids=ids, attributes=attrs)
        return sub.reverse() if self.reversed_ else sub

    def __repr__(self) -> str:
        return f"DirectedGraph(n={self.n}, edges={self.edge_count}, direction={self.direction.value})"


def oriented_view(graph: DirectedGraph, direction: ControlDirection | str) -> DirectedGraph:
    """Orient ``graph`` for a control analysis.

    Supply-side control follows goods flow (the view as given); demand-side
    control runs from client to supplier, i.e. the reversed view.
    """
    direction = ControlDirection.parse(direction)
    if direction is ControlDirection.SUPPLY:
        return graph
    return graph.reverse()


def _open_text(path: Path, encoding: str):
    try:
        return open(path, newline="", encoding=encoding)
    except OSError as exc:
        raise GraphFormatError(f"cannot read {path}: {exc.strerror}") from exc


def load_edges(path: str | Path, fmt: EdgeListFormat | None = None) -> DirectedGraph:
    """Read a ``supplier<sep>client`` edge list.

    Node ids are assigned dense indices in first-seen order (source before
    target within a line), so repeated loads produce identical graphs.
    """
    fmt = fmt or EdgeListFormat()
    path = Path(path)
    index: dict[str, int] = {}
    ids: list[str] = []
    src: list[int] = []
    dst: list[int] = []
    report = IngestionReport()

    def intern(token: str) -> int:
        i = index.get(token)
        if i is None:
            i = index[token] = len(ids)
            ids.append(token)
        return i

    with _open_text(path, fmt.encoding) as fh:
        reader = csv.reader(fh, delimiter=fmt.sep)
        try:
            for row in reader:
                if not row or (len(row) == 1 and not row[0].strip()):
                    continue
                if fmt.header and not report.header_skipped:
                    report.header_skipped = True
                    continue
                if len(row) < 2:
                    raise GraphFormatError(f"{path}:{reader.line_num}: expected two ids, got {row!r}")
                a, b = row[0].strip(), row[1].strip()
                if not a or not b:
                    raise GraphFormatError(f"{path}:{reader.line_num}: empty node id")
                src.append(intern(a))
                dst.append(intern(b))
        except (csv.Error, UnicodeDecodeError) as exc:
            raise GraphFormatError(f"{path}:{reader.line_num}: {exc}") from exc

    if not src:
        raise GraphFormatError(f"{path}: no edge records")
    report.records = len(src)
    g = DirectedGraph.from_edges(len(ids), np.array(src, dtype=np.int64),
                                 np.array(dst, dtype=np.int64), ids=ids, report=report)
    g._index = index
    return g


def load_attributes(
    path: str | Path,
    graph: DirectedGraph,
    fmt: EdgeListFormat | None = None,
    scheme: IndustryScheme = DEFAULT_INDUSTRIES,
    max_unmatched: float = 0.5,
) -> tuple[DirectedGraph, AttributeReport]:
    """Join an ``id<sep>capital<sep>industry`` table onto ``graph``.

    Empty capital or industry fields mean "unknown". Rows whose id is absent
    from the graph are counted, not inserted. More than ``max_unmatched`` of
    rows unmatched is treated as a wrong-file error.
    """
    fmt = fmt or EdgeListFormat()
    path = Path(path)
    capital = np.full(graph.n, np.nan)
    industry = np.full(graph.n, UNKNOWN_INDUSTRY, dtype=np.int16)
    seen = np.zeros(graph.n, dtype=bool)
    rep = AttributeReport()

    with _open_text(path, fmt.encoding) as fh:
        reader = csv.reader(fh, delimiter=fmt.sep)
        skip_header = fmt.header
        for row in reader:
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if skip_header:
                skip_header = False
                continue
            where = f"{path}:{reader.line_num}"
            if len(row) < 3:
                raise GraphFormatError(f"{where}: expected id, capital, industry; got {row!r}")
            node, cap_tok, ind_tok = row[0].strip(), row[1].strip(), row[2].strip()
            if not node:
                raise GraphFormatError(f"{where}: empty node id")
            rep.rows += 1
            cap = math.nan
            if cap_tok:
                try:
                    cap = float(cap_tok)
                except ValueError:
                    raise GraphFormatError(f"{where}: capital {cap_tok!r} is not a number") from None
                if not cap >= 0 or math.isinf(cap):
                    raise GraphFormatError(f"{where}: capital must be finite and non-negative")
            ind = UNKNOWN_INDUSTRY
            if ind_tok:
                try:
                    ind = scheme.lookup(ind_tok)
                except KeyError:
                    raise GraphFormatError(f"{where}: industry {ind_tok!r} not in the configured scheme") from None
            try:
                v = graph.index_of(node)
            except KeyError:
                rep.unmatched_rows += 1
                continue
            if seen[v]:
                raise GraphFormatError(f"{where}: duplicate attribute row for {node!r}")
            seen[v] = True
            capital[v] = cap
            industry[v] = ind

    if rep.rows == 0:
        raise GraphFormatError(f"{path}: no attribute rows")
    if rep.unmatched_rows > max_unmatched * rep.rows:
        raise GraphFormatError(
            f"{path}: {rep.unmatched_rows} of {rep.rows} rows match no graph node (wrong file?)")
    rep.matched = rep.rows - rep.unmatched_rows
    rep.nodes_without_row = int((~seen).sum())
    rep.unknown_capital = int(np.isnan(capital).sum())
    rep.unknown_industry = int((industry == UNKNOWN_INDUSTRY).sum())
    return graph.with_attributes(FirmTable(capital, industry, scheme)), rep


def write_edges(graph: DirectedGraph, path: str | Path, sep: str = ",") -> None:
    """Write the stored (supplier -> client) edge list."""
    g = graph.reverse() if graph.reversed_ else graph
    s, t = g.edges()
    ids = g.ids
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for a, b in zip(s.tolist(), t.tolist()):
            fh.write(f"{ids[a]}{sep}{ids[b]}\n")


def write_attributes(graph: DirectedGraph, path: str | Path, sep: str = ",") -> None:
    if graph.attributes is None:
        raise ValueError("graph has no attributes")
    at = graph.attributes
    ids = graph.ids
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for v in range(graph.n):
            cap = at.capital[v]
            cap_s = "" if math.isnan(cap) else repr(float(cap))
            ind = int(at.industry[v])
            ind_s = "" if ind == UNKNOWN_INDUSTRY else at.scheme.labels[ind]
            fh.write(f"{ids[v]}{sep}{cap_s}{sep}{ind_s}\n")
