"""
Flow engine: adaptive integration of x' = -grad f(x) and event detection.
"""

from .batch import FlowBatch, integrate_many
from .config import IntegratorConfig
from .engine import dissipation_residual, integrate_flow, tail_arc_length
from .events import Crossing, event_crossings
from .trajectory import StopReason, Trajectory

__all__ = [
    "IntegratorConfig",
    "Trajectory",
    "StopReason",
    "integrate_flow",
    "integrate_many",
    "FlowBatch",
    "dissipation_residual",
    "tail_arc_length",
    "event_crossings",
    "Crossing",
]
