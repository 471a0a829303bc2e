"""
Lojasiewicz lab: exponent fits, normal bias, secant limits, Z-sets and limit coverage.
"""

from .bias import BiasReport, SecantReport, normal_bias, secant_limit
from .fits import MIN_SAMPLES, AnalysisFit, fit_line, fit_power_law, tail_indices
from .limits import CoverageReport, dense_limit_survey
from .lojasiewicz import (
    DistanceEnvelope,
    check_distance_inequality,
    distance_envelope,
    distance_series,
    estimate_lojasiewicz,
    exponential_decay_rate,
    lojasiewicz_threshold,
    tail_length_rate,
)
from .zset import ZSetReport, z_set_crossings

__all__ = [
    "AnalysisFit",
    "MIN_SAMPLES",
    "fit_line",
    "fit_power_law",
    "tail_indices",
    "estimate_lojasiewicz",
    "check_distance_inequality",
    "tail_length_rate",
    "exponential_decay_rate",
    "distance_series",
    "distance_envelope",
    "DistanceEnvelope",
    "lojasiewicz_threshold",
    "BiasReport",
    "SecantReport",
    "normal_bias",
    "secant_limit",
    "ZSetReport",
    "z_set_crossings",
    "CoverageReport",
    "dense_limit_survey",
]
