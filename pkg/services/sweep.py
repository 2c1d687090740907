"""
Working-parameter sweeps.

Flow per grid point:
  1. Bias-window check
  2. Spectroscopy (solve_coupled), computed once per point
  3. Evaluator: ITA gate leakage, DM gate leakage, or both on the shared table

Points run concurrently on a process pool, throttled by a semaphore of
`workers` slots. Results are assembled in grid order (outer axis ascending,
inner axis ascending) regardless of completion order. A NumericalError at
one point never aborts the sweep: the point gets eta = 1 and a flag.
"""

import asyncio
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Literal, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field
from tqdm import tqdm

from squid.constants import (
    BOUNDARY_TOLERANCE,
    DEFAULT_BASIS_SIZE,
    DEFAULT_BIAS_WINDOW,
    DEFAULT_MAX_DURATION,
    DEFAULT_MAX_REFINEMENTS,
    DEFAULT_STATES,
    DEFAULT_STEP_DIVISOR,
    DEFAULT_WINDOW,
    DEFAULT_GRID_POINTS,
    MAX_PHOTONS,
    WELL_THRESHOLD,
)
from squid.dynamics import dm_gate_leakage
from squid.errors import InvalidParameterError, NumericalError
from squid.leakage import cnot_drive, gate_leakage
from squid.model import check_bias_window, derive_scales
from squid.schemas import (
    FghGrid,
    GateLeakage,
    LeakageMap,
    LeakagePoint,
    LevelRow,
    ModelScales,
    SpectroTable,
    SweepSpec,
    WorkingParams,
)
from squid.spectro import level_spacings, solve_coupled

logger = logging.getLogger(__name__)

Evaluator = Literal["ita", "dm", "both"]


class EvaluationContext(BaseModel):
    """Everything a worker needs to evaluate one working point."""
    model_config = ConfigDict(frozen=True)

    scales: ModelScales
    grid: FghGrid = Field(default_factory=lambda: FghGrid(
        lower=DEFAULT_WINDOW[0], upper=DEFAULT_WINDOW[1], points=DEFAULT_GRID_POINTS
    ))
    states: int = DEFAULT_STATES
    backend: Literal["product", "full2d"] = "product"
    basis_size: int = DEFAULT_BASIS_SIZE
    well_threshold: float = WELL_THRESHOLD
    boundary_tolerance: float = BOUNDARY_TOLERANCE
    bias_window: Tuple[float, float] = DEFAULT_BIAS_WINDOW
    max_photons: int = MAX_PHOTONS
    photon_aggregation: Literal["max", "sum"] = "max"
    max_duration: float = DEFAULT_MAX_DURATION
    step_divisor: int = DEFAULT_STEP_DIVISOR
    max_refinements: int = DEFAULT_MAX_REFINEMENTS

    @classmethod
    def from_config(cls, config) -> "EvaluationContext":
        """Build from a util.config.RunConfig."""
        return cls(
            scales=derive_scales(config.device_params()),
            grid=config.fgh_grid(),
            states=config.grid.states,
            backend=config.grid.backend,
            basis_size=config.grid.basis_size,
            well_threshold=config.grid.well_threshold,
            boundary_tolerance=config.grid.boundary_tolerance,
            bias_window=config.grid.bias_window,
            max_photons=config.drive.max_photons,
            photon_aggregation=config.drive.photon_aggregation,
            max_duration=config.drive.max_duration,
            step_divisor=config.dm.step_divisor,
            max_refinements=config.dm.max_refinements,
        )

    def solver_options(self) -> dict:
        return {
            "backend": self.backend,
            "basis_size": self.basis_size,
            "threshold": self.well_threshold,
            "boundary_tolerance": self.boundary_tolerance,
        }

    def solve(self, wp: WorkingParams, require_basis: bool = True) -> SpectroTable:
        return solve_coupled(self.scales, wp, self.grid, self.states, require_basis=require_basis, **self.solver_options())

    def ita(self, table: SpectroTable, amplitude: float) -> GateLeakage:
        return gate_leakage(table, cnot_drive(table, amplitude), self.max_photons, self.photon_aggregation)

    def dm(self, table: SpectroTable, amplitude: float) -> GateLeakage:
        return dm_gate_leakage(table, amplitude, self.max_duration, self.step_divisor, self.max_refinements)


# ── Per-point evaluation (runs in worker processes) ───────────────────────────

def _flagged(wp: WorkingParams, flag: str, started: float) -> LeakagePoint:
    return LeakagePoint(working_params=wp, eta=1.0, flag=flag, wall_time=time.perf_counter() - started)


def _point(wp: WorkingParams, result: GateLeakage, started: float) -> LeakagePoint:
    return LeakagePoint(
        working_params=wp,
        eta=result.eta,
        components={label: c.eta for label, c in result.components.items()},
        flag=result.flag,
        wall_time=time.perf_counter() - started,
    )


def evaluate_point(ctx: EvaluationContext, wp: WorkingParams, evaluator: Evaluator, amplitude: float):
    """
    Gate leakage at one working point.

    Returns a LeakagePoint, or an (ITA, DM) pair of LeakagePoints when
    evaluator is "both" (the spectroscopy is shared).
    """
    started = time.perf_counter()
    try:
        check_bias_window(wp, ctx.bias_window)
        table = ctx.solve(wp)
    except InvalidParameterError:
        failed = _flagged(wp, "invalid_wp", started)
        return (failed, failed) if evaluator == "both" else failed
    except NumericalError as e:
        logger.debug(f"Point {wp} flagged: {e}")
        failed = _flagged(wp, e.flag, started)
        return (failed, failed) if evaluator == "both" else failed

    outcomes = []
    for method in (("ita", "dm") if evaluator == "both" else (evaluator,)):
        method_started = started if not outcomes else time.perf_counter()
        try:
            result = ctx.ita(table, amplitude) if method == "ita" else ctx.dm(table, amplitude)
            outcomes.append(_point(wp, result, method_started))
        except NumericalError as e:
            logger.debug(f"Point {wp} flagged by {method}: {e}")
            outcomes.append(_flagged(wp, e.flag, method_started))
    return tuple(outcomes) if evaluator == "both" else outcomes[0]


def level_row(ctx: EvaluationContext, wp: WorkingParams) -> LevelRow:
    """Eigenenergies and computational level spacings at one working point."""
    try:
        check_bias_window(wp, ctx.bias_window)
        table = ctx.solve(wp, require_basis=False)
    except InvalidParameterError:
        return LevelRow(working_params=wp, flag="invalid_wp")
    except NumericalError as e:
        return LevelRow(working_params=wp, flag=e.flag)

    energies = [float(e) for e in table.energies]
    if table.computational is None:
        return LevelRow(working_params=wp, energies=energies, flag="basis_undefined")
    return LevelRow(working_params=wp, energies=energies, spacings=level_spacings(table))


# ── Orchestration ─────────────────────────────────────────────────────────────

async def _evaluate_all(
    function: Callable,
    arguments: Sequence[tuple],
    workers: int,
    description: str,
) -> list:
    """Run function(*args) for every argument tuple, keeping input order."""
    results: list = [None] * len(arguments)
    progress = tqdm(total=len(arguments), desc=description, unit="pt", leave=False)

    if workers <= 1:
        for k, args in enumerate(arguments):
            results[k] = function(*args)
            progress.update(1)
        progress.close()
        return results

    loop = asyncio.get_running_loop()
    semaphore = asyncio.Semaphore(workers)

    with ProcessPoolExecutor(max_workers=workers) as pool:
        async def _launch(k: int, args: tuple) -> None:
            async with semaphore:
                results[k] = await loop.run_in_executor(pool, function, *args)
            progress.update(1)

        await asyncio.gather(*[_launch(k, args) for k, args in enumerate(arguments)])

    progress.close()
    return results


def run_parallel(function: Callable, arguments: Sequence[tuple], workers: int = 1, description: str = "") -> list:
    return asyncio.run(_evaluate_all(function, arguments, workers, description))


def _leakage_map(spec: SweepSpec, points: List[LeakagePoint], method: str, config_hash, elapsed) -> LeakageMap:
    return LeakageMap(
        axes=spec.axes,
        points=points,
        method=method,
        amplitude=spec.amplitude,
        config_hash=config_hash,
        elapsed=elapsed,
    )


def sweep(
    spec: SweepSpec,
    ctx: EvaluationContext,
    workers: int = 1,
    config_hash: Optional[str] = None,
) -> LeakageMap:
    """
    Evaluate the sweep's evaluator at every grid point.

    Args:
        spec: Axes, fixed working parameters, evaluator and drive amplitude
        ctx: Spectroscopy and evaluator settings
        workers: Worker processes (1 runs inline)
        config_hash: Provenance recorded on the map
    """
    method = spec.evaluator.upper()
    working_points = spec.working_points()
    logger.info("=" * 60)
    logger.info(
        f"{method} sweep: {len(working_points)} point(s) over "
        f"{[axis.name for axis in spec.axes] or 'fixed WP'}, x_m0={spec.amplitude}, workers={workers}"
    )

    started = time.perf_counter()
    points = run_parallel(
        evaluate_point,
        [(ctx, wp, spec.evaluator, spec.amplitude) for wp in working_points],
        workers,
        f"{method} map",
    )
    elapsed = time.perf_counter() - started

    flagged = sum(1 for p in points if p.flag is not None)
    logger.info(f"{method} sweep finished in {elapsed:.1f}s ({flagged} flagged)")
    logger.info("=" * 60)
    return _leakage_map(spec, points, method, config_hash, elapsed)


def ita_leakage_map(
    s: ModelScales,
    spec: SweepSpec,
    amplitude: Optional[float] = None,
    ctx: Optional[EvaluationContext] = None,
    workers: int = 1,
    config_hash: Optional[str] = None,
) -> LeakageMap:
    """ITA gate leakage over the sweep grid; failed points carry eta = 1 and a flag."""
    ctx = ctx or EvaluationContext(scales=s)
    update = {"evaluator": "ita"} | ({"amplitude": amplitude} if amplitude is not None else {})
    return sweep(spec.model_copy(update=update), ctx, workers, config_hash)


def dm_leakage_map(
    s: ModelScales,
    spec: SweepSpec,
    amplitude: Optional[float] = None,
    ctx: Optional[EvaluationContext] = None,
    workers: int = 1,
    config_hash: Optional[str] = None,
) -> LeakageMap:
    """DM gate leakage over the sweep grid; provenance marks method = DM."""
    ctx = ctx or EvaluationContext(scales=s)
    update = {"evaluator": "dm"} | ({"amplitude": amplitude} if amplitude is not None else {})
    return sweep(spec.model_copy(update=update), ctx, workers, config_hash)


def paired_leakage_maps(
    spec: SweepSpec,
    ctx: EvaluationContext,
    workers: int = 1,
    config_hash: Optional[str] = None,
) -> Tuple[LeakageMap, LeakageMap]:
    """ITA and DM maps on the same grid, sharing one spectroscopy per point."""
    working_points = spec.working_points()
    logger.info("=" * 60)
    logger.info(f"ITA+DM sweep: {len(working_points)} point(s), workers={workers}")

    started = time.perf_counter()
    pairs = run_parallel(
        evaluate_point,
        [(ctx, wp, "both", spec.amplitude) for wp in working_points],
        workers,
        "ITA+DM map",
    )
    elapsed = time.perf_counter() - started
    logger.info(f"ITA+DM sweep finished in {elapsed:.1f}s")
    logger.info("=" * 60)

    ita_map = _leakage_map(spec, [p[0] for p in pairs], "ITA", config_hash, elapsed)
    dm_map = _leakage_map(spec, [p[1] for p in pairs], "DM", config_hash, elapsed)
    return ita_map, dm_map


def level_spacing_map(spec: SweepSpec, ctx: EvaluationContext, workers: int = 1) -> List[LevelRow]:
    """Eigenenergies and |E_j - E_i| between computational states over the sweep grid."""
    working_points = spec.working_points()
    logger.info(f"Level sweep: {len(working_points)} point(s), workers={workers}")
    return run_parallel(level_row, [(ctx, wp) for wp in working_points], workers, "levels")


__all__ = [
    "EvaluationContext",
    "evaluate_point",
    "level_row",
    "run_parallel",
    "sweep",
    "ita_leakage_map",
    "dm_leakage_map",
    "paired_leakage_maps",
    "level_spacing_map",
]
