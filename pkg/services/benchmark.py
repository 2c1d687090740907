"""
ITA vs DM cost benchmark.

Measures, per working point, the spectroscopy time tau_S (solve_coupled)
and the time tau_T of one component's DM evolution over the pi-pulse.
With the spectroscopy shared, an n-qubit gate costs tau_I ~ tau_S by ITA
and tau_D ~ tau_S + 2^n tau_T by DM, so tau_D / tau_I = 1 + 2^n zeta with
zeta = tau_T / tau_S. Timings run serially on one worker.
"""

import logging
import os
import platform
import statistics
import time
from typing import List, Sequence

import numpy as np
import scipy

from squid.dynamics import basis_state, cnot_pulse, evolve
from squid.errors import InvalidParameterError
from squid.schemas import BenchmarkReport, WorkingParams
from .sweep import EvaluationContext

logger = logging.getLogger(__name__)

QUBITS = 2


def environment() -> dict:
    return {
        "platform": platform.platform(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "cpus": str(os.cpu_count()),
    }


def benchmark_speedup(
    ctx: EvaluationContext,
    points: Sequence[WorkingParams],
    amplitude: float,
    initial_state: str = "10",
) -> BenchmarkReport:
    """
    Time spectroscopy and a single-component DM run at each working point.

    Raises:
        InvalidParameterError: with fewer than 3 working points
    """
    if len(points) < 3:
        raise InvalidParameterError(f"Benchmark needs at least 3 working points, got {len(points)}")

    logger.info("=" * 60)
    logger.info(f"Benchmark: {len(points)} working point(s), x_m0={amplitude}")

    spectroscopy: List[float] = []
    transitions: List[float] = []
    for wp in points:
        started = time.perf_counter()
        table = ctx.solve(wp)
        spectroscopy.append(time.perf_counter() - started)

        pulse, _ = cnot_pulse(table, amplitude, ctx.max_duration)
        initial = basis_state(table, initial_state)
        started = time.perf_counter()
        evolve(table, pulse, initial, ctx.step_divisor, ctx.max_refinements)
        transitions.append(time.perf_counter() - started)

        logger.info(f"  {wp}: tau_S={spectroscopy[-1]:.4f}s, tau_T={transitions[-1]:.4f}s")

    tau_s = statistics.median(spectroscopy)
    tau_t = statistics.median(transitions)
    zeta = tau_t / tau_s
    ita_time = tau_s
    dm_time = tau_s + 2 ** QUBITS * tau_t

    report = BenchmarkReport(
        spectroscopy_time=tau_s,
        transition_time=tau_t,
        ita_time=ita_time,
        dm_time=dm_time,
        ratio=dm_time / ita_time,
        zeta=zeta,
        qubits=QUBITS,
        samples=len(points),
        environment=environment(),
    )
    logger.info(f"Benchmark: zeta={zeta:.2f}, tau_D/tau_I={report.ratio:.2f}")
    logger.info("=" * 60)
    return report


__all__ = ["benchmark_speedup", "environment"]
