"""
Independent transition approximation (ITA) of CNOT gate leakage.

Every level pair is treated as an isolated two-level system driven by
x_m(t) = x_m0 cos(omega t). Its maximum N-photon transition probability is

    P = Omega^2 / (D^2 + Omega^2)
    Omega = 2 x_m0 |O_ij| N J_N(y) / y,   y = x_m0 (O_jj - O_ii) / omega
    D = |E_j - E_i| - N omega

with O the drive-coupling matrix of the SpectroTable. A component's leakage
is the sum of its maximum probabilities over undesired states; the gate
leakage is the worst component.
"""

import logging
import math
from typing import Dict, List, Literal

import numpy as np
from scipy.special import jv

from .constants import (
    CNOT_PARTNER,
    COMPUTATIONAL_LABELS,
    MAX_PHOTONS,
    RESONANCE_EPSILON,
    WEAK_FIELD_RATIO,
)
from .schemas import ComponentLeakage, DrivePulse, GateLeakage, SpectroTable, TransitionRecord

logger = logging.getLogger(__name__)

PhotonAggregation = Literal["max", "sum"]

_SMALL_ARGUMENT = 1e-8


def bessel_rabi_factor(N: int, y: float) -> float:
    """
    N*J_N(y)/y with the y -> 0 limit taken analytically.

    The limit is 1/2 for N = 1 and 0 for N >= 2; below |y| = 1e-8 the
    leading series term N*(y/2)^N/(N!*y) is used so the factor stays
    continuous in y.
    """
    if N < 1:
        raise ValueError(f"Photon number must be >= 1, got {N}")
    if abs(y) < _SMALL_ARGUMENT:
        return N * (0.5 ** N) * y ** (N - 1) / math.factorial(N)
    return float(N * jv(N, y) / y)


def cnot_drive(table: SpectroTable, amplitude: float, duration: float = 1.0) -> DrivePulse:
    """Rectangular pulse resonant with |10> <-> |11>."""
    return DrivePulse(amplitude=amplitude, frequency=table.cnot_frequency(), duration=duration)


def bessel_argument(table: SpectroTable, pulse: DrivePulse, i: int, j: int) -> float:
    """y_ij = x_m0 (O_jj - O_ii) / omega, the argument of the photon-number Bessel factor."""
    return float(pulse.amplitude * (table.drive[j, j] - table.drive[i, i]) / pulse.frequency)


def transition_probability(
    table: SpectroTable,
    pulse: DrivePulse,
    i: int,
    j: int,
    N: int,
) -> TransitionRecord:
    """Maximum probability of the i -> j transition in an N-photon process."""
    if i == j:
        raise ValueError("Transition needs two distinct states")
    drive = table.drive
    y = bessel_argument(table, pulse, i, j)
    rabi = 2.0 * pulse.amplitude * abs(drive[i, j]) * abs(bessel_rabi_factor(N, y))
    detuning = abs(table.energies[j] - table.energies[i]) - N * pulse.frequency

    if rabi == 0.0:
        # Forbidden transition, including the 0/0 case exactly on resonance.
        probability = 0.0
    elif abs(detuning) < RESONANCE_EPSILON * pulse.frequency:
        probability = 1.0
    else:
        probability = rabi ** 2 / (detuning ** 2 + rabi ** 2)

    return TransitionRecord(
        i=i,
        j=j,
        photons=N,
        rabi=rabi,
        detuning=detuning,
        bessel_argument=float(y),
        probability=probability,
    )


def undesired_states(table: SpectroTable, component: str) -> List[int]:
    """All retained states except the component and, for |10>/|11>, its CNOT partner."""
    excluded = {table.index(component)}
    if component in CNOT_PARTNER:
        excluded.add(table.index(CNOT_PARTNER[component]))
    return [k for k in range(table.size) if k not in excluded]


def component_leakage(
    table: SpectroTable,
    pulse: DrivePulse,
    component: str,
    max_photons: int = MAX_PHOTONS,
    aggregation: PhotonAggregation = "max",
) -> ComponentLeakage:
    """
    Leakage eta_i of one computational input state.

    Args:
        table: Spectroscopic table with a defined computational map
        pulse: Drive; only amplitude and frequency are used
        component: '00', '01', '10' or '11'
        max_photons: Highest photon number considered
        aggregation: How N-photon probabilities combine into P_ik ('max' or 'sum')
    """
    source = table.index(component)
    breakdown: Dict[int, float] = {}
    for k in undesired_states(table, component):
        probabilities = [
            transition_probability(table, pulse, source, k, N).probability
            for N in range(1, max_photons + 1)
        ]
        breakdown[k] = max(probabilities) if aggregation == "max" else sum(probabilities)

    eta = sum(breakdown.values())
    dominant = max(breakdown, key=breakdown.get) if breakdown else None
    return ComponentLeakage(component=component, eta=eta, breakdown=breakdown, dominant_channel=dominant)


def weak_field_ratio(table: SpectroTable, pulse: DrivePulse) -> float:
    """
    Largest possible Rabi frequency over omega.

    Uses max_N N*J_N(y)/y = 1/2 (attained by N = 1 as y -> 0), so the
    bound is x_m0 * max|O_ij| / omega.
    """
    off_diagonal = np.abs(table.drive - np.diag(np.diag(table.drive)))
    return float(2.0 * pulse.amplitude * off_diagonal.max() * 0.5 / pulse.frequency)


def check_weak_field(table: SpectroTable, pulse: DrivePulse) -> float:
    ratio = weak_field_ratio(table, pulse)
    if ratio > WEAK_FIELD_RATIO:
        logger.warning(
            f"Drive exceeds the weak-field regime at {table.working_params}: "
            f"max Rabi/omega bound {ratio:.3g} > {WEAK_FIELD_RATIO}"
        )
    return ratio


def gate_leakage(
    table: SpectroTable,
    pulse: DrivePulse,
    max_photons: int = MAX_PHOTONS,
    aggregation: PhotonAggregation = "max",
) -> GateLeakage:
    """CNOT gate leakage eta = max(eta_00, eta_01, eta_10, eta_11) by ITA."""
    check_weak_field(table, pulse)
    components = {
        label: component_leakage(table, pulse, label, max_photons, aggregation)
        for label in COMPUTATIONAL_LABELS
    }
    eta = max(c.eta for c in components.values())
    return GateLeakage(eta=eta, components=components, method="ITA")
