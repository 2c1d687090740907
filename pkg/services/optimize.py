"""
Local refinement of the leakage minimum and ITA-vs-DM map comparison.
"""

import itertools
import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError
from scipy.optimize import minimize
from scipy.stats import spearmanr

from squid.errors import ConfigurationError, GridMismatchError, RefinementFailed
from squid.schemas import (
    LeakageMap,
    LeakagePoint,
    MapComparison,
    OptimalWP,
    SweepSpec,
    TrajectoryStep,
)
from .sweep import EvaluationContext, evaluate_point, sweep

logger = logging.getLogger(__name__)

SIMPLEX_TOLERANCE = 1e-6
MAX_EVALUATIONS = 200


def refine(
    objective: Callable[[np.ndarray], Optional[float]],
    seed: Sequence[float],
    radius: Sequence[float],
    axes: Sequence[str] = (),
    seed_eta: Optional[float] = None,
    max_evaluations: int = MAX_EVALUATIONS,
    tolerance: float = SIMPLEX_TOLERANCE,
) -> OptimalWP:
    """
    Nelder-Mead descent from a seed point.

    The initial simplex is the seed plus one vertex per axis offset by that
    axis' radius. Stops once every vertex is within `tolerance` of the best
    one or after `max_evaluations` objective calls. The result is never
    worse than the seed.

    Args:
        objective: eta at a point, or None for a flagged point
        seed: Starting coordinates
        radius: Initial simplex size per axis
        axes: Axis names recorded on the result
        seed_eta: eta at the seed if already known

    Raises:
        RefinementFailed: if every evaluated point is flagged (carries the
            seed as OptimalWP in .result)
    """
    seed = np.asarray(seed, dtype=float)
    radius = np.asarray(radius, dtype=float)
    trajectory: List[TrajectoryStep] = []
    flagged = 0

    def _objective(point: np.ndarray) -> float:
        nonlocal flagged
        eta = objective(point)
        trajectory.append(TrajectoryStep(point=[float(v) for v in point], eta=eta))
        if eta is None or not math.isfinite(eta):
            flagged += 1
            return math.inf
        return float(eta)

    if seed_eta is None:
        seed_eta = objective(seed)
    seed_value = math.inf if seed_eta is None else float(seed_eta)

    simplex = np.vstack([seed] + [seed + radius[k] * np.eye(len(seed))[k] for k in range(len(seed))])
    result = minimize(
        _objective,
        seed,
        method="Nelder-Mead",
        options={
            "initial_simplex": simplex,
            "xatol": tolerance,
            "fatol": math.inf,
            "maxfev": max_evaluations,
        },
    )
    evaluations = len(trajectory)
    converged = bool(result.status == 0)

    if flagged == evaluations:
        fallback = 1.0 if seed_eta is None else float(seed_eta)
        failed = OptimalWP(
            axes=list(axes), point=[float(v) for v in seed], eta=fallback, seed_eta=fallback,
            trajectory=trajectory, converged=False, evaluations=evaluations,
        )
        raise RefinementFailed(f"All {evaluations} refinement points were flagged", result=failed)

    if float(result.fun) < seed_value:
        point, eta = result.x, float(result.fun)
    else:
        point, eta = seed, seed_value

    logger.info(
        f"Refinement: eta {seed_value:.4e} -> {eta:.4e} after {evaluations} evaluations "
        f"({'converged' if converged else 'stopped'})"
    )
    return OptimalWP(
        axes=list(axes),
        point=[float(v) for v in point],
        eta=eta,
        seed_eta=seed_value,
        trajectory=trajectory,
        converged=converged,
        evaluations=evaluations,
    )


def best_point(leakage_map: LeakageMap) -> Tuple[int, LeakagePoint]:
    """Lowest-eta unflagged point (first in grid order on ties)."""
    candidates = leakage_map.unflagged()
    if not candidates:
        raise RefinementFailed("Every grid point is flagged; nothing to refine from")
    index = min(candidates, key=lambda k: leakage_map.points[k].eta)
    return index, leakage_map.points[index]


def refine_working_point(
    ctx: EvaluationContext,
    spec: SweepSpec,
    seed: LeakagePoint,
    radius_steps: float = 1.0,
    max_evaluations: int = MAX_EVALUATIONS,
) -> OptimalWP:
    """
    Refine over the sweep's axes from a grid point.

    The simplex radius is radius_steps grid steps per axis.
    """
    if not spec.axes:
        raise ConfigurationError("Refinement needs at least one sweep axis")
    if seed.flag is not None:
        raise RefinementFailed(f"Seed point is flagged ({seed.flag})")

    names = [axis.name for axis in spec.axes]
    start = [getattr(seed.working_params, name) for name in names]
    radius = [radius_steps * (axis.maximum - axis.minimum) / (axis.count - 1) for axis in spec.axes]

    def _eta(point: np.ndarray) -> Optional[float]:
        try:
            wp = seed.working_params.replace(**{name: float(v) for name, v in zip(names, point)})
        except ValidationError:
            return None
        result = evaluate_point(ctx, wp, spec.evaluator, spec.amplitude)
        return None if result.flag is not None else result.eta

    optimum = refine(_eta, start, radius, names, seed.eta, max_evaluations)
    wp = seed.working_params.replace(**dict(zip(names, optimum.point)))
    return optimum.model_copy(update={"working_params": wp})


def optimize(
    spec: SweepSpec,
    ctx: EvaluationContext,
    workers: int = 1,
    radius_steps: float = 1.0,
    max_evaluations: int = MAX_EVALUATIONS,
    config_hash: Optional[str] = None,
) -> Tuple[LeakageMap, OptimalWP]:
    """Grid sweep followed by refinement from its best unflagged point."""
    leakage_map = sweep(spec, ctx, workers, config_hash)
    _, seed = best_point(leakage_map)
    logger.info(f"Refining from {seed.working_params} (eta={seed.eta:.4e})")
    return leakage_map, refine_working_point(ctx, spec, seed, radius_steps, max_evaluations)


# ── Map comparison ────────────────────────────────────────────────────────────

def _check_same_grid(first: LeakageMap, second: LeakageMap) -> None:
    if len(first.points) != len(second.points):
        raise GridMismatchError(f"Maps have {len(first.points)} and {len(second.points)} points")
    for a, b in zip(first.points, second.points):
        if a.working_params != b.working_params:
            raise GridMismatchError(f"Grid points differ: {a.working_params} vs {b.working_params}")


def _pairs(count: int, samples: int, seed: int) -> np.ndarray:
    if count < 2:
        return np.empty((0, 2), dtype=int)
    if samples <= 0:
        return np.array(list(itertools.combinations(range(count), 2)))
    rng = np.random.default_rng(seed)
    first = rng.integers(0, count, size=samples)
    offset = rng.integers(1, count, size=samples)
    return np.stack([first, (first + offset) % count], axis=1)


def compare_maps(
    ita: LeakageMap,
    dm: LeakageMap,
    pair_samples: int = 0,
    seed: int = 0,
) -> MapComparison:
    """
    Agreement between two leakage maps on the same grid.

    Only points unflagged in both maps are used. Reports Spearman rank
    correlation (None and degenerate=True if either map is constant),
    log10(eta_ITA / eta_DM) statistics, and the fraction of point pairs
    ordered the same way by both maps (all pairs, or `pair_samples` random
    pairs drawn with `seed`).

    Raises:
        GridMismatchError: if the maps are not on identical grids
    """
    _check_same_grid(ita, dm)
    common = [k for k in ita.unflagged() if dm.points[k].flag is None]
    a = np.array([ita.points[k].eta for k in common], dtype=float)
    b = np.array([dm.points[k].eta for k in common], dtype=float)

    degenerate = bool(len(common) < 2 or np.ptp(a) == 0.0 or np.ptp(b) == 0.0)
    rank = None if degenerate else float(spearmanr(a, b)[0])
    if degenerate:
        logger.warning(f"Rank correlation undefined over {len(common)} common point(s)")

    positive = (a > 0) & (b > 0)
    ratios = np.full(len(common), np.nan)
    ratios[positive] = np.log10(a[positive] / b[positive])
    finite = np.abs(ratios[np.isfinite(ratios)])

    pairs = _pairs(len(common), pair_samples, seed)
    if len(pairs):
        same = np.sign(a[pairs[:, 0]] - a[pairs[:, 1]]) == np.sign(b[pairs[:, 0]] - b[pairs[:, 1]])
        agreement = float(np.mean(same))
    else:
        agreement = None

    return MapComparison(
        points=len(common),
        ita=a.tolist(),
        dm=b.tolist(),
        rank_correlation=rank,
        degenerate=degenerate,
        log_ratios=ratios.tolist(),
        max_abs_log_ratio=float(finite.max()) if finite.size else None,
        median_abs_log_ratio=float(np.median(finite)) if finite.size else None,
        ordering_agreement=agreement,
        pairs=len(pairs),
    )


__all__ = [
    "refine",
    "best_point",
    "refine_working_point",
    "optimize",
    "compare_maps",
]
