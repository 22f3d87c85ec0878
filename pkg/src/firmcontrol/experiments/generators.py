"""Random and synthetic firm networks."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np

from ..graph import DirectedGraph, FirmTable, IndustryScheme, IngestionReport

log = logging.getLogger(__name__)

_LOG_CAPITAL_MEAN = 10.0
_LOG_CAPITAL_SD = 2.0

__all__ = ["random_graph", "synth_firm_network", "SynthReport", "powerlaw_sequence"]


def _ids(n: int) -> list[str]:
    return [f"f{i}" for i in range(n)]


def random_graph(n: int, m: int, seed: int = 0) -> DirectedGraph:
    """Directed G(n, m): ``m`` distinct ordered pairs without self-loops, drawn uniformly."""
    total = n * (n - 1)
    if n < 0 or m < 0 or m > total:
        raise ValueError(f"cannot place {m} edges on {n} nodes without self-loops")
    rng = np.random.default_rng(seed)
    if m > total // 2:
        codes = rng.permutation(total)[:m]
    else:
        # oversample, keep the first m distinct codes in draw order
        picked = np.empty(0, dtype=np.int64)
        while picked.size < m:
            need = m - picked.size
            draw = rng.integers(0, total, size=int(need * 1.1) + 16, dtype=np.int64)
            allc = np.concatenate([picked, draw])
            _, first = np.unique(allc, return_index=True)
            picked = allc[np.sort(first)]
        codes = picked[:m]
    s, t = np.divmod(codes, n - 1)
    t = t + (t >= s)
    return DirectedGraph.from_edges(n, s, t, ids=_ids(n))


@dataclass
class SynthReport:
    nodes: int
    stubs: int
    edges: int
    self_loops_initial: int
    multi_edges_initial: int
    rewired: int
    dropped: int

    def to_dict(self) -> dict:
        return asdict(self)


def powerlaw_sequence(n: int, total: int, gamma: float, rng: np.random.Generator,
                      k_max: int | None = None) -> np.ndarray:
    """Integer sequence of length ``n`` summing to ``total`` with a power-law tail.

    Draws continuous Pareto values with the minimum chosen to give mean
    ``total / n``, floors them, then adds or removes single units at random
    positions (weighted by the current value) to hit ``total`` exactly.
    """
    if gamma <= 2:
        raise ValueError("gamma must exceed 2 for a finite mean")
    mean = total / n
    x_min = mean * (gamma - 2) / (gamma - 1)
    u = rng.random(n)
    vals = x_min * (1.0 - u) ** (-1.0 / (gamma - 1.0))
    k_max = n - 1 if k_max is None else k_max
    seq = np.minimum(np.floor(vals + 0.5).astype(np.int64), k_max)
    diff = total - int(seq.sum())
    while diff != 0:
        if diff > 0:
            room = k_max - seq
            p = (seq + 1.0) * (room > 0)
            idx = rng.choice(n, size=diff, p=p / p.sum())
            np.add.at(seq, idx, 1)
            np.minimum(seq, k_max, out=seq)
        else:
            p = seq.astype(float)
            idx = rng.choice(n, size=min(-diff, int((seq > 0).sum())), replace=False, p=p / p.sum())
            seq[idx] -= 1
        diff = total - int(seq.sum())
    return seq


def _pair_stubs(dout, din, rng):
    src = np.repeat(np.arange(dout.size, dtype=np.int64), dout)
    dst = np.repeat(np.arange(din.size, dtype=np.int64), din)
    rng.shuffle(dst)
    return src, dst


def _repair(n, src, dst, rng, max_rounds, patience=20):
    """Rewire self-loops and duplicate edges by degree-preserving swaps.

    Each bad edge (a, b) is swapped with a random good edge (c, d) into
    (a, d) and (c, b) when both are new and loop-free. Stops when nothing
    is pending, after ``max_rounds``, or after ``patience`` rounds in a row
    without a successful swap.
    """
    codes = src * n + dst
    order = np.argsort(codes, kind="stable")
    sc = codes[order]
    dup = np.zeros(codes.size, dtype=bool)
    dup[order[1:]] = sc[1:] == sc[:-1]
    loops = src == dst
    bad = np.flatnonzero(dup | loops)
    stats = (int(loops.sum()), int((dup & ~loops).sum()))
    if bad.size == 0:
        return src, dst, stats, 0, 0

    good_mask = np.ones(codes.size, dtype=bool)
    good_mask[bad] = False
    present = set(codes[good_mask].tolist())
    src, dst = src.copy(), dst.copy()
    rewired = 0
    pending = bad.tolist()
    stalled = 0
    for _ in range(max_rounds):
        if not pending or stalled >= patience:
            break
        partners = rng.integers(0, src.size, size=len(pending))
        still = []
        for e, f in zip(pending, partners.tolist()):
            if not good_mask[f]:
                still.append(e)
                continue
            a, b, c, d = int(src[e]), int(dst[e]), int(src[f]), int(dst[f])
            k1, k2 = a * n + d, c * n + b
            if a == d or c == b or k1 == k2 or k1 in present or k2 in present:
                still.append(e)
                continue
            present.discard(c * n + d)
            present.add(k1)
            present.add(k2)
            dst[e], dst[f] = d, b
            good_mask[e] = True
            rewired += 1
        stalled = stalled + 1 if len(still) == len(pending) else 0
        pending = still
    keep = good_mask
    return src[keep], dst[keep], stats, rewired, len(pending)


def synth_firm_network(
    n: int,
    m: int,
    gamma_out: float = 2.5,
    gamma_in: float = 2.5,
    capital_coupling: float = 0.9,
    industry_count: int = 19,
    seed: int = 0,
    degree_correlation: float = 0.8,
    max_rounds: int = 2000,
    max_attempts: int = 10,
) -> tuple[DirectedGraph, SynthReport]:
    """Directed configuration-model firm network with capital and industry.

    In- and out-degree sequences are power laws summing to ``m``; a node's
    in- and out-degree ranks share a latent firm size (mixed by
    ``degree_correlation``). Stubs are paired uniformly and self-loops or
    multi-edges are repaired by degree-preserving swaps; anything left after
    ``max_rounds`` is dropped and counted. If more than 1% of stubs would be
    dropped the degree sequences are redrawn, up to ``max_attempts`` times.

    Log capital is ``c * z + sqrt(1 - c^2) * noise`` (scaled), where ``z`` is
    the standardised log total degree and ``c = capital_coupling``; coupling
    1 makes capital a monotone function of degree. Industries are drawn with
    weights tilted by ``z``.
    """
    if n < 2:
        raise ValueError("need at least two nodes")
    if not 0 <= capital_coupling <= 1:
        raise ValueError("capital_coupling must lie in [0, 1]")
    if not 0 <= degree_correlation <= 1:
        raise ValueError("degree_correlation must lie in [0, 1]")
    if industry_count < 1:
        raise ValueError("industry_count must be >= 1")
    if m > n * (n - 1):
        raise ValueError("more edges than ordered node pairs")
    ss = np.random.SeedSequence(seed)
    r_deg, r_pair, r_cap, r_ind = (np.random.default_rng(s) for s in ss.spawn(4))

    for attempt in range(max_attempts):
        dout = np.sort(powerlaw_sequence(n, m, gamma_out, r_deg))[::-1]
        din = np.sort(powerlaw_sequence(n, m, gamma_in, r_deg))[::-1]
        # latent size ranks: out-degree follows size, in-degree follows a noisy copy
        size = r_deg.standard_normal(n)
        noisy = degree_correlation * size + np.sqrt(1 - degree_correlation**2) * r_deg.standard_normal(n)
        out_deg = np.empty(n, dtype=np.int64)
        in_deg = np.empty(n, dtype=np.int64)
        out_deg[np.argsort(-size, kind="stable")] = dout
        in_deg[np.argsort(-noisy, kind="stable")] = din

        src, dst = _pair_stubs(out_deg, in_deg, r_pair)
        src, dst, (loops0, multi0), rewired, dropped = _repair(n, src, dst, r_pair, max_rounds)
        if dropped <= 0.01 * m:
            break
        log.info("attempt %d: %d of %d stubs unpaired, redrawing degrees", attempt, dropped, m)
    else:
        raise ValueError(f"degree sequence not realisable after {max_attempts} attempts: "
                         f"{dropped} of {m} stubs left unpaired")

    report = IngestionReport(records=int(src.size))
    g = DirectedGraph.from_edges(n, src, dst, ids=_ids(n), report=report)
    total = (g.in_degree() + g.out_degree()).astype(float)
    z = np.log1p(total)
    z = (z - z.mean()) / (z.std() or 1.0)
    score = capital_coupling * z + np.sqrt(1.0 - capital_coupling**2) * r_cap.standard_normal(n)
    capital = np.round(np.exp(_LOG_CAPITAL_MEAN + _LOG_CAPITAL_SD * score), 2)

    scheme = IndustryScheme.generic(industry_count)
    base = r_ind.dirichlet(np.full(industry_count, 2.0))
    tilt = r_ind.normal(0.0, 0.6, size=industry_count)
    logits = np.log(base)[None, :] + z[:, None] * tilt[None, :]
    logits -= logits.max(axis=1, keepdims=True)
    w = np.exp(logits)
    cdf = np.cumsum(w, axis=1)
    cdf /= cdf[:, -1:]
    industry = (r_ind.random(n)[:, None] > cdf).sum(axis=1).astype(np.int16)
    del w, cdf, logits

    g = g.with_attributes(FirmTable(capital, industry, scheme))
    rep = SynthReport(nodes=n, stubs=m, edges=g.edge_count, self_loops_initial=loops0,
                      multi_edges_initial=multi0, rewired=rewired, dropped=dropped)
    log.info("synthetic network: %s", rep)
    return g, rep
