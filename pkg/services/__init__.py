"""
Services Package
Sweeps, refinement, map comparison and benchmarking on top of squid.
"""

from .sweep import (
    EvaluationContext,
    evaluate_point,
    sweep,
    ita_leakage_map,
    dm_leakage_map,
    paired_leakage_maps,
    level_spacing_map,
)
from .optimize import refine, best_point, refine_working_point, optimize, compare_maps
from .benchmark import benchmark_speedup

__all__ = [
    "EvaluationContext",
    "evaluate_point",
    "sweep",
    "ita_leakage_map",
    "dm_leakage_map",
    "paired_leakage_maps",
    "level_spacing_map",
    "refine",
    "best_point",
    "refine_working_point",
    "optimize",
    "compare_maps",
    "benchmark_speedup",
]
