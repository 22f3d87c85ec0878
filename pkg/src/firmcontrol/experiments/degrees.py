"""Degree distributions, discrete power-law fitting and the mean-field driver ratio."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import zeta

from ..graph import DirectedGraph

__all__ = [
    "DegreeDistribution",
    "DegreeStats",
    "PowerLawFit",
    "degree_stats",
    "fit_power_law",
    "analytic_driver_ratio",
]

FLAVORS = ("in", "out", "total")
_GAMMA_BOUNDS = (1.0 + 1e-6, 12.0)


@dataclass(frozen=True)
class PowerLawFit:
    gamma: float
    k_min: int
    ks_distance: float
    n_tail: int


@dataclass(eq=False)
class DegreeDistribution:
    flavor: str
    k: np.ndarray  # distinct observed degrees, ascending
    count: np.ndarray
    survival: np.ndarray  # P(K >= k)
    mean: float
    fit: PowerLawFit | None = None


@dataclass(eq=False)
class DegreeStats:
    flavors: dict[str, DegreeDistribution] = field(default_factory=dict)

    def __getitem__(self, flavor: str) -> DegreeDistribution:
        return self.flavors[flavor]

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("flavor,k,count,survival\n")
            for flavor in FLAVORS:
                d = self.flavors[flavor]
                for k, c, s in zip(d.k.tolist(), d.count.tolist(), d.survival.tolist()):
                    fh.write(f"{flavor},{k},{c},{s!r}\n")

    def summary(self) -> dict:
        out = {}
        for flavor, d in self.flavors.items():
            out[flavor] = {
                "mean": d.mean,
                "gamma": d.fit.gamma if d.fit else None,
                "k_min": d.fit.k_min if d.fit else None,
                "ks_distance": d.fit.ks_distance if d.fit else None,
                "n_tail": d.fit.n_tail if d.fit else None,
            }
        return out


def _distribution(flavor: str, degrees: np.ndarray, fit: bool) -> DegreeDistribution:
    k, count = np.unique(degrees, return_counts=True)
    n = degrees.size
    # survival[i] = #(deg >= k[i]) / n
    survival = np.cumsum(count[::-1])[::-1] / n
    pl = None
    if fit:
        pos = degrees[degrees > 0]
        try:
            pl = fit_power_law(pos)
        except ValueError:
            pl = None
    return DegreeDistribution(flavor, k, count, survival, float(degrees.mean()), pl)


def degree_stats(graph: DirectedGraph, fit: bool = True) -> DegreeStats:
    """Histogram and survival function of in, out and total degree."""
    if graph.n < 1:
        raise ValueError("graph has no nodes")
    din, dout = graph.in_degree(), graph.out_degree()
    stats = DegreeStats()
    for flavor, deg in zip(FLAVORS, (din, dout, din + dout)):
        stats.flavors[flavor] = _distribution(flavor, deg, fit)
    return stats


def _mle_gamma(n_tail: int, sum_log: float, k_min: int) -> float:
    # discrete MLE: maximise -n log zeta(g, k_min) - g * sum(log k)
    def nll(g):
        return n_tail * math.log(zeta(g, k_min)) + g * sum_log

    res = minimize_scalar(nll, bounds=_GAMMA_BOUNDS, method="bounded",
                          options={"xatol": 1e-7})
    return float(res.x)


def _ks_distance(tail: np.ndarray, gamma: float, k_min: int) -> float:
    vals, counts = np.unique(tail, return_counts=True)
    emp_cdf = np.cumsum(counts) / tail.size
    norm = zeta(gamma, k_min)
    # model P(K <= x) at each observed value and just before the next one
    model_at = 1.0 - zeta(gamma, vals + 1.0) / norm
    before_next = vals[1:] - 1
    model_before = 1.0 - zeta(gamma, before_next + 1.0) / norm
    d = np.abs(emp_cdf - model_at).max()
    if before_next.size:
        d = max(d, np.abs(emp_cdf[:-1] - model_before).max())
    return float(d)


def fit_power_law(degrees, min_tail: int = 10) -> PowerLawFit:
    """Discrete power-law fit with ``k_min`` chosen by minimum KS distance.

    For each candidate ``k_min`` (every distinct value leaving at least
    ``min_tail`` observations in the tail) the exponent is the discrete
    maximum-likelihood estimate; the candidate with the smallest
    Kolmogorov-Smirnov distance between tail and fitted model wins.
    """
    x = np.asarray(degrees)
    if x.size == 0:
        raise ValueError("no observations")
    if np.any(x != np.round(x)) or np.any(x < 1):
        raise ValueError("degrees must be positive integers")
    x = np.sort(x.astype(np.int64))
    if x.size < min_tail:
        raise ValueError(f"need at least {min_tail} observations, got {x.size}")
    if x[0] == x[-1]:
        raise ValueError("degenerate sample: all observations equal")

    logs = np.log(x)
    # suffix sums over the sorted sample give each tail's sufficient statistics
    suffix_log = np.cumsum(logs[::-1])[::-1]
    candidates, first = np.unique(x, return_index=True)
    best: PowerLawFit | None = None
    for k_min, i in zip(candidates.tolist(), first.tolist()):
        n_tail = x.size - i
        if n_tail < min_tail:
            break
        tail = x[i:]
        if tail[0] == tail[-1]:
            break
        g = _mle_gamma(n_tail, float(suffix_log[i]), k_min)
        d = _ks_distance(tail, g, k_min)
        if best is None or d < best.ks_distance:
            best = PowerLawFit(g, int(k_min), d, int(n_tail))
    if best is None:
        raise ValueError("no admissible k_min candidate")
    return best


def analytic_driver_ratio(gamma: float, mean_k: float) -> float:
    """Mean-field driver fraction of a scale-free network.

    ``exp(-(1 - 1/(gamma-1)) * mean_k / 2)``, capped at 1 (below ``gamma = 2``
    the coefficient turns negative and the expression stops being a fraction).
    """
    if not gamma > 1:
        raise ValueError("gamma must exceed 1")
    if not mean_k >= 0:
        raise ValueError("mean degree must be non-negative")
    coef = 1.0 - 1.0 / (gamma - 1.0)
    return min(1.0, math.exp(-0.5 * coef * mean_k))
