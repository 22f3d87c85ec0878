"""Experiment pipelines: clipping series, degree statistics, generators, industry shares."""
from .clipping import ClipKind, ClipSeriesReport, ClipStrategy, DEFAULT_FRACTIONS, clip, clip_series
from .degrees import DegreeStats, PowerLawFit, analytic_driver_ratio, degree_stats, fit_power_law
from .generators import SynthReport, random_graph, synth_firm_network
from .industry import IndustryShareReport, industry_shares

__all__ = [
    "ClipKind", "ClipSeriesReport", "ClipStrategy", "DEFAULT_FRACTIONS", "clip", "clip_series",
    "DegreeStats", "PowerLawFit", "analytic_driver_ratio", "degree_stats", "fit_power_law",
    "SynthReport", "random_graph", "synth_firm_network",
    "IndustryShareReport", "industry_shares",
]
