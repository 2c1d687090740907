"""
Dynamic method (DM): time-dependent Schrodinger equation for the lowest-K
eigenstate amplitudes of the coupled qubits under the full microwave
interaction (no rotating-wave approximation).

    i dc_n/dtau = sum_n' [E_n delta_nn' + V_nn'(tau)] c_n'
    V(tau) = O x_m(tau) + (rho/2) x_m(tau)^2,   x_m = x_m0 cos(omega tau)

Stepping is fixed-step fourth-order Magnus: on each step the propagator is
exp(-i G) with G built from the Hamiltonian at the two Gauss points and
their commutator, so every step is exactly unitary. The step starts at
(2 pi / omega) / step_divisor and is halved until the final amplitudes are
stable to 1e-6.
"""

import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from .constants import (
    CNOT_PARTNER,
    COMPUTATIONAL_LABELS,
    DEFAULT_BASIS_SIZE,
    DEFAULT_MAX_DURATION,
    DEFAULT_MAX_REFINEMENTS,
    DEFAULT_STEP_DIVISOR,
    MIN_COUPLING,
    NORM_DRIFT_TOLERANCE,
    STEP_HALVING_TOLERANCE,
    TRUNCATION_TOLERANCE,
    TWO_PI,
)
from .errors import IntegrationFailure, InvalidParameterError, NoCouplingError
from .leakage import bessel_argument, bessel_rabi_factor, cnot_drive, undesired_states, weak_field_ratio
from .spectro import solve_coupled
from .schemas import (
    ComponentLeakage,
    DrivePulse,
    FidelityReport,
    FghGrid,
    GateLeakage,
    ModelScales,
    SpectroTable,
    TdseResult,
    WorkingParams,
)

logger = logging.getLogger(__name__)

CNOT = np.array([
    [1, 0, 0, 0],
    [0, 1, 0, 0],
    [0, 0, 0, 1],
    [0, 0, 1, 0],
], dtype=complex)

_GAUSS_OFFSET = math.sqrt(3.0) / 6.0
_MAGNUS_COMMUTATOR = math.sqrt(3.0) / 12.0
_CHUNK = 2048
_MAX_SAMPLES = 20000


def interaction_row(table: SpectroTable, pulse: DrivePulse, tau: float) -> np.ndarray:
    """
    Interaction matrix V(tau) in hbar*omega_LC over the retained states.

    Includes the (rho/2) x_m^2 diagonal self-term and all counter-rotating
    content; zero outside the pulse window [0, duration].
    """
    if 0.0 <= tau <= pulse.duration:
        x_m = pulse.amplitude * math.cos(pulse.frequency * tau)
    else:
        x_m = 0.0
    return table.drive * x_m + 0.5 * table.rho * x_m ** 2 * np.eye(table.size)


def pi_pulse_duration(table: SpectroTable, x_m0: float) -> float:
    """
    Resonant pi time for |10> <-> |11>: pi / Omega_34 with the one-photon
    Rabi frequency Omega_34 = 2 x_m0 |O_34| J_1(y_34)/y_34.

    Reduces to pi / (x_m0 |O_34|) when O_33 = O_44.

    Raises:
        NoCouplingError: if |O_34| < 1e-12 or J_1(y_34) vanishes
    """
    if not x_m0 > 0:
        raise InvalidParameterError(f"Drive amplitude must be positive, got {x_m0}")
    first, second = table.index("10"), table.index("11")
    coupling = abs(table.drive[first, second])
    if coupling < MIN_COUPLING:
        raise NoCouplingError(f"|O_34| = {coupling:.3e} at {table.working_params}")
    pulse = cnot_drive(table, x_m0)
    rabi = 2.0 * x_m0 * coupling * abs(bessel_rabi_factor(1, bessel_argument(table, pulse, first, second)))
    if rabi < MIN_COUPLING * x_m0:
        raise NoCouplingError(f"One-photon Rabi frequency vanishes at {table.working_params}")
    return math.pi / rabi


# ── Propagation ───────────────────────────────────────────────────────────────

def magnus_generators(table: SpectroTable, pulse: DrivePulse, starts: np.ndarray, dt: float) -> np.ndarray:
    """
    Fourth-order Magnus exponents G (n, K, K) for steps [t, t + dt], t in `starts`.

    The real part is dt (E + (V(t_1) + V(t_2)) / 2) at the Gauss points
    t_1,2 = t + (1/2 -+ sqrt(3)/6) dt, and G - dt H_bar is the commutator
    correction i sqrt(3)/12 dt^2 [H(t_1), H(t_2)]. Assumes the steps lie
    inside the pulse.
    """
    energies = table.energies
    starts = np.asarray(starts, dtype=float)
    f1 = pulse.amplitude * np.cos(pulse.frequency * (starts + (0.5 - _GAUSS_OFFSET) * dt))
    f2 = pulse.amplitude * np.cos(pulse.frequency * (starts + (0.5 + _GAUSS_OFFSET) * dt))
    commutator = np.subtract.outer(energies, energies) * table.drive
    return (
        dt * np.diag(energies)
        + (0.5 * dt * (f1 + f2))[:, None, None] * table.drive
        + (0.25 * dt * table.rho * (f1 ** 2 + f2 ** 2))[:, None, None] * np.eye(table.size)
        + (1j * _MAGNUS_COMMUTATOR * dt ** 2 * (f2 - f1))[:, None, None] * commutator
    )


def _propagate(
    table: SpectroTable,
    pulse: DrivePulse,
    states: np.ndarray,
    step: float,
    t_final: float,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, float]:
    """
    Integrate columns of `states` (K, m) from 0 to t_final.

    Returns (times, samples (n, K, m), peak populations (K, m), final (K, m), step used).
    """
    energies = table.energies

    pulse_end = min(pulse.duration, t_final)
    steps = max(1, math.ceil(pulse_end / step - 1e-9))
    dt = pulse_end / steps
    stride = max(1, math.ceil(steps / _MAX_SAMPLES))

    states = np.array(states, dtype=complex)
    times = [0.0]
    samples = [states.copy()]
    peak = np.abs(states) ** 2

    for start in range(0, steps, _CHUNK):
        index = np.arange(start, min(steps, start + _CHUNK))
        eigenvalues, vectors = np.linalg.eigh(magnus_generators(table, pulse, index * dt, dt))
        propagators = (vectors * np.exp(-1j * eigenvalues)[:, None, :]) @ vectors.conj().transpose(0, 2, 1)

        for offset, propagator in enumerate(propagators):
            states = propagator @ states
            peak = np.maximum(peak, np.abs(states) ** 2)
            number = start + offset + 1
            if number % stride == 0 or number == steps:
                times.append(number * dt)
                samples.append(states.copy())

    if t_final > pulse_end:
        states = np.exp(-1j * energies * (t_final - pulse_end))[:, None] * states
        times.append(t_final)
        samples.append(states.copy())

    return np.array(times), np.array(samples), peak, states, dt


def _norm_drift(samples: np.ndarray) -> float:
    norms = np.sum(np.abs(samples) ** 2, axis=1)
    return float(np.max(np.abs(norms - 1.0)))


def evolve_states(
    table: SpectroTable,
    pulse: DrivePulse,
    initial: np.ndarray,
    step_divisor: int = DEFAULT_STEP_DIVISOR,
    max_refinements: int = DEFAULT_MAX_REFINEMENTS,
    t_final: Optional[float] = None,
) -> List[TdseResult]:
    """
    Evolve several initial states (columns of `initial`) under one pulse.

    The step starts at (2 pi / omega) / step_divisor and is halved until two
    successive step sizes give final amplitudes within 1e-6; the finer run is
    kept.

    Raises:
        InvalidParameterError: on an unnormalized initial state
        IntegrationFailure: if norm drift exceeds 1e-8 or the step-halving
            check still fails after max_refinements halvings
    """
    initial = np.asarray(initial, dtype=complex)
    if initial.ndim == 1:
        initial = initial[:, None]
    if initial.shape[0] != table.size:
        raise InvalidParameterError(f"Initial state has {initial.shape[0]} amplitudes, table has {table.size}")
    norms = np.sum(np.abs(initial) ** 2, axis=0)
    if np.any(np.abs(norms - 1.0) > 1e-10):
        raise InvalidParameterError(f"Initial states are not normalized: {norms}")

    if max_refinements < 1:
        raise InvalidParameterError(f"max_refinements must be >= 1, got {max_refinements}")

    t_final = pulse.duration if t_final is None else t_final
    step = TWO_PI / pulse.frequency / step_divisor

    previous = _propagate(table, pulse, initial, step, t_final)
    for refinement in range(1, max_refinements + 1):
        step /= 2.0
        current = _propagate(table, pulse, initial, step, t_final)
        change = float(np.max(np.abs(current[3] - previous[3])))
        logger.debug(f"evolve: step {current[4]:.4g}, final-amplitude change {change:.2e}")
        if change < STEP_HALVING_TOLERANCE:
            break
        previous = current
    else:
        raise IntegrationFailure(
            f"Final amplitudes still change by {change:.2e} after {max_refinements} step halvings"
        )

    times, samples, peak, final, dt = current
    results = []
    for column in range(initial.shape[1]):
        drift = _norm_drift(samples[:, :, column])
        if drift > NORM_DRIFT_TOLERANCE:
            raise IntegrationFailure(f"Norm drift {drift:.2e} exceeds {NORM_DRIFT_TOLERANCE}")
        results.append(TdseResult(
            times=times,
            amplitudes=samples[:, :, column],
            max_populations=peak[:, column],
            final_amplitudes=final[:, column],
            norm_drift=drift,
            step=dt,
            refinements=refinement,
        ))
    return results


def evolve(
    table: SpectroTable,
    pulse: DrivePulse,
    initial: np.ndarray,
    step_divisor: int = DEFAULT_STEP_DIVISOR,
    max_refinements: int = DEFAULT_MAX_REFINEMENTS,
    t_final: Optional[float] = None,
) -> TdseResult:
    """Evolve one normalized initial amplitude vector over the pulse."""
    return evolve_states(table, pulse, initial, step_divisor, max_refinements, t_final)[0]


def basis_state(table: SpectroTable, label: str) -> np.ndarray:
    state = np.zeros(table.size, dtype=complex)
    state[table.index(label)] = 1.0
    return state


def cnot_pulse(
    table: SpectroTable,
    x_m0: float,
    max_duration: float = DEFAULT_MAX_DURATION,
) -> Tuple[DrivePulse, Optional[str]]:
    """CNOT pi-pulse, capped at max_duration; returns (pulse, flag)."""
    try:
        duration = pi_pulse_duration(table, x_m0)
    except NoCouplingError:
        duration = math.inf
    flag = None
    if duration > max_duration:
        logger.warning(f"pi-pulse {duration:.3g} capped at {max_duration:.3g} for {table.working_params}")
        duration, flag = max_duration, "duration_capped"
    return cnot_drive(table, x_m0, duration), flag


# ── Gate quality ──────────────────────────────────────────────────────────────

def dm_gate_leakage(
    table: SpectroTable,
    x_m0: float,
    max_duration: float = DEFAULT_MAX_DURATION,
    step_divisor: int = DEFAULT_STEP_DIVISOR,
    max_refinements: int = DEFAULT_MAX_REFINEMENTS,
) -> GateLeakage:
    """
    CNOT leakage from the maximum populations of undesired states during a
    pi-pulse, for each computational input state.
    """
    pulse, flag = cnot_pulse(table, x_m0, max_duration)
    initial = np.stack([basis_state(table, label) for label in COMPUTATIONAL_LABELS], axis=1)
    results = evolve_states(table, pulse, initial, step_divisor, max_refinements)

    components = {}
    for label, result in zip(COMPUTATIONAL_LABELS, results):
        breakdown = {k: float(result.max_populations[k]) for k in undesired_states(table, label)}
        dominant = max(breakdown, key=breakdown.get) if breakdown else None
        components[label] = ComponentLeakage(
            component=label,
            eta=sum(breakdown.values()),
            breakdown=breakdown,
            dominant_channel=dominant,
        )
    eta = max(c.eta for c in components.values())
    return GateLeakage(eta=eta, components=components, method="DM", flag=flag)


def interaction_picture_matrix(table: SpectroTable, results: List[TdseResult], tau: float) -> np.ndarray:
    """M[b', b]: final amplitude on b' from initial b with free phases removed."""
    indices = [table.index(label) for label in COMPUTATIONAL_LABELS]
    phases = np.exp(1j * table.energies[indices] * tau)
    return np.stack([phases * r.final_amplitudes[indices] for r in results], axis=1)


def gate_fidelity(matrix: np.ndarray, ideal: np.ndarray = CNOT) -> Tuple[float, float, List[float]]:
    """
    Average fidelity over the 4-dimensional subspace,
    F = (Tr(M^dag M) + |Tr(U^dag M)|^2) / 20.

    Returns (phase-optimized F, raw F, phases). The optimum over diagonal
    phases diag(1, e^{i phi_1}, e^{i phi_2}, e^{i phi_3}) applied to M aligns
    every diagonal entry of M U^dag with the first one.
    """
    dimension = matrix.shape[0]
    norm = dimension * (dimension + 1)
    purity = float(np.real(np.trace(matrix.conj().T @ matrix)))
    raw = (purity + abs(np.trace(ideal.conj().T @ matrix)) ** 2) / norm

    diagonal = np.diag(matrix @ ideal.conj().T)
    reference = np.angle(diagonal[0]) if abs(diagonal[0]) > 0 else np.angle(diagonal[np.argmax(np.abs(diagonal))])
    phases = [float(reference - np.angle(a)) for a in diagonal[1:]]
    optimized = (purity + float(np.sum(np.abs(diagonal))) ** 2) / norm
    return min(optimized, 1.0), min(raw, 1.0), phases


def cnot_fidelity(
    table: SpectroTable,
    x_m0: float,
    max_duration: float = DEFAULT_MAX_DURATION,
    step_divisor: int = DEFAULT_STEP_DIVISOR,
    max_refinements: int = DEFAULT_MAX_REFINEMENTS,
    t_final: Optional[float] = None,
) -> FidelityReport:
    """
    CNOT fidelity after a pi-pulse, averaged over all input states.

    Args:
        t_final: Evaluate the interaction-picture matrix at this time
            (defaults to the end of the pulse; later times add free evolution)
    """
    pulse, _ = cnot_pulse(table, x_m0, max_duration)
    tau = pulse.duration if t_final is None else t_final
    initial = np.stack([basis_state(table, label) for label in COMPUTATIONAL_LABELS], axis=1)
    results = evolve_states(table, pulse, initial, step_divisor, max_refinements, tau)

    matrix = interaction_picture_matrix(table, results, tau)
    fidelity, raw, phases = gate_fidelity(matrix)
    leakage = {
        label: float(max(0.0, 1.0 - np.sum(np.abs(matrix[:, b]) ** 2)))
        for b, label in enumerate(COMPUTATIONAL_LABELS)
    }
    return FidelityReport(
        fidelity=fidelity,
        raw_fidelity=raw,
        subspace_matrix=matrix,
        phases=phases,
        subspace_leakage=leakage,
        duration=pulse.duration,
        weak_field_ratio=weak_field_ratio(table, pulse),
    )


def truncation_check(
    s: ModelScales,
    wp: WorkingParams,
    g: FghGrid,
    x_m0: float,
    K: int,
    extra: int = 10,
    max_duration: float = DEFAULT_MAX_DURATION,
    **solver_options,
) -> float:
    """
    Largest change of the computational-state populations after a pi-pulse
    from |10> when K + extra states are retained instead of K.
    """
    finals = []
    for size in (K, K + extra):
        options = dict(solver_options)
        if options.get("backend", "product") == "product":
            options["basis_size"] = max(options.get("basis_size", DEFAULT_BASIS_SIZE), math.isqrt(size - 1) + 1)
        table = solve_coupled(s, wp, g, size, **options)
        pulse, _ = cnot_pulse(table, x_m0, max_duration)
        result = evolve(table, pulse, basis_state(table, "10"))
        indices = [table.index(label) for label in COMPUTATIONAL_LABELS]
        finals.append(np.abs(result.final_amplitudes[indices]) ** 2)

    delta = float(np.max(np.abs(finals[1] - finals[0])))
    if delta > TRUNCATION_TOLERANCE:
        logger.warning(f"Truncation check: populations change by {delta:.2e} between K={K} and K={K + extra}")
    return delta


__all__ = [
    "CNOT",
    "CNOT_PARTNER",
    "interaction_row",
    "pi_pulse_duration",
    "magnus_generators",
    "evolve",
    "evolve_states",
    "basis_state",
    "cnot_pulse",
    "dm_gate_leakage",
    "interaction_picture_matrix",
    "gate_fidelity",
    "cnot_fidelity",
    "truncation_check",
]
