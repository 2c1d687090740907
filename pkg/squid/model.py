"""
rf-SQUID model: scale derivation, one- and two-qubit potentials and the
four-well structure of the coupled potential.

Dimensionless form of the single-SQUID potential:
    U(x) = rho*(x - x_e)^2/2 - e_J*cos(2*pi*x)
and the coupled potential adds rho*kappa*(x1 - x_e1)*(x2 - x_e2).
"""

import logging
import math
from typing import List, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize, root

from .constants import (
    DEFAULT_BIAS_WINDOW,
    DEFAULT_WINDOW,
    FLUX_QUANTUM,
    FOUR_PI_SQUARED,
    HBAR,
    TWO_PI,
    WELL_DEDUP_DISTANCE,
    WELL_LABELS,
    WELL_SEED_POINTS,
)
from .errors import FourWellStructureLost, InvalidParameterError
from .schemas import DeviceParams, ModelScales, WellMinimum, WorkingParams

logger = logging.getLogger(__name__)


def derive_scales(dp: DeviceParams) -> ModelScales:
    """
    Convert SI device parameters to the dimensionless model constants.

    Args:
        dp: Device parameters (beta_l already resolved from I_c if needed)

    Returns:
        ModelScales with omega_LC, m = C*Phi_0^2, rho = m*omega_LC/hbar and
        e_J = rho*beta_L/(4*pi^2)
    """
    for name in ("inductance", "capacitance", "beta_l"):
        value = getattr(dp, name)
        if value is None or not value > 0:
            raise InvalidParameterError(f"device.{name} must be positive, got {value}")

    omega_lc = 1.0 / math.sqrt(dp.inductance * dp.capacitance)
    mass = dp.capacitance * FLUX_QUANTUM ** 2
    rho = mass * omega_lc / HBAR
    ej = rho * dp.beta_l / FOUR_PI_SQUARED
    return ModelScales(omega_lc=omega_lc, mass=mass, rho=rho, beta_l=dp.beta_l, ej=ej)


def check_bias_window(wp: WorkingParams, window: Tuple[float, float] = DEFAULT_BIAS_WINDOW) -> None:
    """Raise InvalidParameterError if a flux bias lies outside the window."""
    lower, upper = window
    for name in ("x_e1", "x_e2"):
        value = getattr(wp, name)
        if not lower <= value <= upper:
            raise InvalidParameterError(f"{name}={value} outside bias window [{lower}, {upper}]")


# ── Potentials ────────────────────────────────────────────────────────────────

def potential_1d(x, x_e: float, s: ModelScales):
    """Single-SQUID potential in hbar*omega_LC (scalar or array x)."""
    return 0.5 * s.rho * (x - x_e) ** 2 - s.ej * np.cos(TWO_PI * x)


def potential_2d(x1, x2, wp: WorkingParams, s: ModelScales):
    """Coupled-SQUID potential in hbar*omega_LC (broadcasts over x1, x2)."""
    return (
        potential_1d(x1, wp.x_e1, s)
        + potential_1d(x2, wp.x_e2, s)
        + s.rho * wp.kappa * (x1 - wp.x_e1) * (x2 - wp.x_e2)
    )


def gradient_2d(x1: float, x2: float, wp: WorkingParams, s: ModelScales) -> np.ndarray:
    coupling = s.rho * wp.kappa
    return np.array([
        s.rho * (x1 - wp.x_e1) + TWO_PI * s.ej * np.sin(TWO_PI * x1) + coupling * (x2 - wp.x_e2),
        s.rho * (x2 - wp.x_e2) + TWO_PI * s.ej * np.sin(TWO_PI * x2) + coupling * (x1 - wp.x_e1),
    ])


# ── Well structure ────────────────────────────────────────────────────────────

def _local_minima(
    wp: WorkingParams,
    s: ModelScales,
    window: Tuple[float, float],
    seeds: int,
) -> List[np.ndarray]:
    """Multi-start descent from the discrete minima of a seeds x seeds sample."""
    lower, upper = window
    axis = np.linspace(lower, upper, seeds)
    x1, x2 = np.meshgrid(axis, axis, indexing="ij")
    sampled = potential_2d(x1, x2, wp, s)

    padded = np.pad(sampled, 1, constant_values=np.inf)
    is_seed = np.ones_like(sampled, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            neighbour = padded[1 + di:1 + di + seeds, 1 + dj:1 + dj + seeds]
            is_seed &= sampled <= neighbour

    bounds = [(lower, upper), (lower, upper)]
    step = axis[1] - axis[0]
    minima: List[np.ndarray] = []
    for i, j in zip(*np.nonzero(is_seed)):
        result = minimize(
            lambda p: float(potential_2d(p[0], p[1], wp, s)),
            x0=np.array([axis[i], axis[j]]),
            jac=lambda p: gradient_2d(p[0], p[1], wp, s),
            method="L-BFGS-B",
            bounds=bounds,
            options={"gtol": 1e-12, "ftol": 1e-15},
        )
        point = result.x
        # Minima pinned to the window edge are artifacts of the bounds.
        if np.any(np.abs(point - lower) < step / 2) or np.any(np.abs(point - upper) < step / 2):
            continue
        if all(np.linalg.norm(point - other) > WELL_DEDUP_DISTANCE for other in minima):
            minima.append(point)
    return minima


def find_saddle(wp: WorkingParams, s: ModelScales, minima: Sequence[np.ndarray]) -> Tuple[float, float]:
    """Central saddle of the four-well potential, started from the wells' centroid."""
    start = np.mean(np.asarray(minima), axis=0)
    result = root(lambda p: gradient_2d(p[0], p[1], wp, s), start, tol=1e-14)
    if not result.success:
        logger.warning(f"Saddle search did not converge at {wp}: {result.message}")
        return float(start[0]), float(start[1])
    return float(result.x[0]), float(result.x[1])


def find_wells(
    wp: WorkingParams,
    s: ModelScales,
    window: Tuple[float, float] = DEFAULT_WINDOW,
    seeds: int = WELL_SEED_POINTS,
) -> List[WellMinimum]:
    """
    Locate and label the four wells of the coupled potential.

    Labels give the low (L) or high (H) flux side of the central saddle for
    qubit 1 then qubit 2. Result is sorted LL, LH, HL, HH.

    Raises:
        FourWellStructureLost: if the window does not hold exactly four minima
    """
    minima = _local_minima(wp, s, window, seeds)
    if len(minima) != 4:
        raise FourWellStructureLost(len(minima))

    saddle = find_saddle(wp, s, minima)
    wells = []
    for point in minima:
        label = ("L" if point[0] < saddle[0] else "H") + ("L" if point[1] < saddle[1] else "H")
        wells.append(WellMinimum(
            x1=float(point[0]),
            x2=float(point[1]),
            energy=float(potential_2d(point[0], point[1], wp, s)),
            label=label,
        ))

    labels = sorted(w.label for w in wells)
    if labels != sorted(WELL_LABELS):
        raise FourWellStructureLost(4, f"Wells do not occupy the four quadrants: {labels}")
    return sorted(wells, key=lambda w: WELL_LABELS.index(w.label))
