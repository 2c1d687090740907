"""
Pydantic schemas for device parameters, spectroscopy tables, leakage and
dynamics results.

All models are frozen; array fields are stored as read-only numpy arrays.
Units are dimensionless throughout (energy in hbar*omega_LC, flux in Phi_0,
time in 1/omega_LC) except DeviceParams, which is SI.
"""

import logging
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .constants import (
    FLUX_QUANTUM,
    FOUR_PI_SQUARED,
    MIN_GRID_POINTS,
    TWO_PI,
)
from .errors import ComputationalBasisUndefined

logger = logging.getLogger(__name__)


def _frozen_array(value, dtype=float) -> np.ndarray:
    array = np.array(value, dtype=dtype)
    array.setflags(write=False)
    return array


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


# ── Device and model parameters ───────────────────────────────────────────────

class DeviceParams(_Frozen):
    """Fabrication-fixed SQUID parameters (SI units)."""
    inductance: float = Field(..., gt=0, description="Loop inductance L (henry)")
    capacitance: float = Field(..., gt=0, description="Junction capacitance C (farad)")
    beta_l: Optional[float] = Field(None, gt=0, description="Shape parameter 2*pi*L*I_c/Phi_0")
    critical_current: Optional[float] = Field(None, gt=0, description="Critical current I_c (ampere)")

    @model_validator(mode="before")
    @classmethod
    def resolve_beta(cls, data):
        if not isinstance(data, dict):
            return data
        beta = data.get("beta_l")
        current = data.get("critical_current")
        inductance = data.get("inductance")
        if current is not None and inductance is not None:
            derived = TWO_PI * float(inductance) * float(current) / FLUX_QUANTUM
            if beta is None:
                return {**data, "beta_l": derived}
            if abs(float(beta) - derived) > 1e-9 * abs(derived):
                raise ValueError(
                    f"beta_l={beta} is inconsistent with critical_current={current} "
                    f"(2*pi*L*I_c/Phi_0 = {derived!r})"
                )
        elif beta is None:
            raise ValueError("Either beta_l or critical_current must be given")
        return data

    @model_validator(mode="after")
    def warn_single_well(self):
        if self.beta_l is not None and self.beta_l <= 1.0:
            logger.warning(f"beta_l={self.beta_l} <= 1: the single-qubit potential has no double well")
        return self


class ModelScales(_Frozen):
    """Dimensionless model constants derived from DeviceParams."""
    omega_lc: float = Field(..., gt=0, description="1/sqrt(LC) in rad/s")
    mass: float = Field(..., ge=0, description="Flux-particle mass C*Phi_0^2 (SI)")
    rho: float = Field(..., gt=0, description="Dimensionless mass m*omega_LC/hbar")
    beta_l: float = Field(..., ge=0, description="Shape parameter")
    ej: float = Field(..., ge=0, description="Josephson energy in hbar*omega_LC")

    @model_validator(mode="after")
    def check_josephson(self):
        expected = self.rho * self.beta_l / FOUR_PI_SQUARED
        if abs(self.ej - expected) > 1e-12 * max(1.0, abs(expected)):
            raise ValueError(f"ej={self.ej} differs from rho*beta_l/4pi^2={expected}")
        return self

    @classmethod
    def dimensionless(cls, rho: float, beta_l: float) -> "ModelScales":
        """Scales for a model given directly in dimensionless form."""
        return cls(omega_lc=1.0, mass=0.0, rho=rho, beta_l=beta_l, ej=rho * beta_l / FOUR_PI_SQUARED)


class WorkingParams(_Frozen):
    """The optimization variables: flux biases and coupling constant."""
    x_e1: float = Field(..., description="Control-qubit bias (Phi_0)")
    x_e2: float = Field(..., description="Target-qubit bias (Phi_0)")
    kappa: float = Field(..., description="Coupling constant M/L")

    @field_validator("kappa")
    @classmethod
    def physical_coupling(cls, value: float) -> float:
        if not abs(value) < 1.0:
            raise ValueError(f"|kappa| must be < 1, got {value}")
        return value

    def reflected(self) -> "WorkingParams":
        return WorkingParams(x_e1=1.0 - self.x_e1, x_e2=1.0 - self.x_e2, kappa=self.kappa)

    def swapped(self) -> "WorkingParams":
        return WorkingParams(x_e1=self.x_e2, x_e2=self.x_e1, kappa=self.kappa)

    def replace(self, **values: float) -> "WorkingParams":
        return WorkingParams(**{**self.model_dump(), **values})


class WellMinimum(_Frozen):
    """A local minimum of the coupled potential."""
    x1: float
    x2: float
    energy: float = Field(..., description="Potential value (hbar*omega_LC)")
    label: Literal["LL", "LH", "HL", "HH"]


# ── Spectroscopy ──────────────────────────────────────────────────────────────

class FghGrid(_Frozen):
    """Periodic Fourier grid x_i = lower + i*spacing, i < points."""
    lower: float
    upper: float
    points: int = Field(..., ge=MIN_GRID_POINTS)

    @model_validator(mode="after")
    def ordered(self):
        if not self.upper > self.lower:
            raise ValueError(f"Empty window [{self.lower}, {self.upper}]")
        return self

    @property
    def spacing(self) -> float:
        return (self.upper - self.lower) / self.points

    @property
    def coordinates(self) -> np.ndarray:
        return self.lower + self.spacing * np.arange(self.points)


class Spectrum1D(_Frozen):
    """Lowest eigenpairs of the single-SQUID Hamiltonian on a grid."""
    x_e: float
    grid: FghGrid
    energies: np.ndarray
    wavefunctions: np.ndarray = Field(..., description="Columns normalized with the spacing-weighted inner product")
    position: np.ndarray = Field(..., description="<m|x|n>")

    @field_validator("energies", "wavefunctions", "position", mode="before")
    @classmethod
    def read_only(cls, value):
        return _frozen_array(value)


class SpectroTable(_Frozen):
    """Spectroscopic properties of the coupled qubits at one working point."""
    working_params: WorkingParams
    rho: float
    backend: str
    energies: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    drive: np.ndarray = Field(..., description="rho*<m|(x2-x_e2)+kappa*(x1-x_e1)|n>")
    well_weights: np.ndarray = Field(..., description="Probability per well, columns LL, LH, HL, HH")
    well_labels: List[Optional[str]]
    computational: Optional[Dict[str, int]] = None
    basis_error: Optional[str] = None
    saddle: Tuple[float, float]

    @field_validator("energies", "x1", "x2", "drive", "well_weights", mode="before")
    @classmethod
    def read_only(cls, value):
        return _frozen_array(value)

    @property
    def size(self) -> int:
        return len(self.energies)

    def index(self, label: str) -> int:
        """Eigenstate index of a computational state label ('00'..'11')."""
        if self.computational is None:
            raise ComputationalBasisUndefined(self.basis_error or "Computational basis is undefined")
        return self.computational[label]

    def spacing(self, a: str, b: str) -> float:
        return abs(self.energies[self.index(b)] - self.energies[self.index(a)])

    def cnot_frequency(self) -> float:
        """Drive frequency of the CNOT pi-pulse, |E_11 - E_10|."""
        return self.spacing("10", "11")


# ── Drive and leakage ─────────────────────────────────────────────────────────

class DrivePulse(_Frozen):
    """Rectangular microwave flux drive x_m(t) = x_m0 cos(omega t)."""
    amplitude: float = Field(..., ge=0, description="x_m0 (Phi_0); zero means free evolution")
    frequency: float = Field(..., gt=0, description="Angular frequency (omega_LC)")
    duration: float = Field(..., gt=0, description="Pulse length (1/omega_LC)")
    envelope: Literal["rectangular"] = "rectangular"


class TransitionRecord(_Frozen):
    """Two-level estimate for one transition and photon number."""
    i: int
    j: int
    photons: int = Field(..., ge=1)
    rabi: float
    detuning: float
    bessel_argument: float
    probability: float = Field(..., ge=0.0, le=1.0)


class ComponentLeakage(_Frozen):
    """Leakage of one computational input state."""
    component: str
    eta: float = Field(..., ge=0.0)
    breakdown: Dict[int, float] = Field(default_factory=dict, description="Undesired state -> max probability")
    dominant_channel: Optional[int] = None


class GateLeakage(_Frozen):
    """Gate leakage eta = max over components."""
    eta: float
    components: Dict[str, ComponentLeakage]
    method: Literal["ITA", "DM"]
    flag: Optional[str] = None


class SweepAxis(_Frozen):
    name: Literal["x_e1", "x_e2", "kappa"]
    minimum: float
    maximum: float
    count: int = Field(..., ge=2)

    @model_validator(mode="after")
    def ordered(self):
        if not self.maximum > self.minimum:
            raise ValueError(f"Axis {self.name}: maximum must exceed minimum")
        return self

    def values(self) -> np.ndarray:
        return np.linspace(self.minimum, self.maximum, self.count)


class SweepSpec(_Frozen):
    """A rectangular working-parameter sweep (outer axis first)."""
    fixed: WorkingParams
    axes: List[SweepAxis] = Field(default_factory=list, max_length=2)
    evaluator: Literal["ita", "dm"] = "ita"
    amplitude: float = Field(..., gt=0)

    @model_validator(mode="after")
    def distinct_axes(self):
        names = [axis.name for axis in self.axes]
        if len(set(names)) != len(names):
            raise ValueError(f"Duplicate sweep axes: {names}")
        return self

    def working_points(self) -> List[WorkingParams]:
        """Grid points in deterministic order: outer axis ascending, inner ascending."""
        if not self.axes:
            return [self.fixed]
        grids = np.meshgrid(*[axis.values() for axis in self.axes], indexing="ij")
        flat = [g.ravel() for g in grids]
        return [
            self.fixed.replace(**{axis.name: float(column[k]) for axis, column in zip(self.axes, flat)})
            for k in range(flat[0].size)
        ]


class LeakagePoint(_Frozen):
    working_params: WorkingParams
    eta: float
    components: Dict[str, float] = Field(default_factory=dict)
    flag: Optional[str] = None
    wall_time: float = 0.0


class LeakageMap(_Frozen):
    """Gate leakage over a working-parameter grid."""
    axes: List[SweepAxis]
    points: List[LeakagePoint]
    method: Literal["ITA", "DM"]
    amplitude: float
    config_hash: Optional[str] = None
    elapsed: float = 0.0

    def etas(self) -> np.ndarray:
        return np.array([p.eta for p in self.points])

    def unflagged(self) -> List[int]:
        return [k for k, p in enumerate(self.points) if p.flag is None]


class LevelRow(_Frozen):
    """One row of a level-spacing sweep."""
    working_params: WorkingParams
    energies: List[float] = Field(default_factory=list)
    spacings: Dict[str, float] = Field(default_factory=dict, description="'12'..'34' -> |E_j - E_i|")
    flag: Optional[str] = None


# ── Dynamics ──────────────────────────────────────────────────────────────────

class TdseResult(_Frozen):
    """Eigenbasis amplitudes integrated over a drive pulse."""
    times: np.ndarray
    amplitudes: np.ndarray = Field(..., description="Shape (len(times), K), Schrodinger picture")
    max_populations: np.ndarray
    final_amplitudes: np.ndarray
    norm_drift: float
    step: float
    refinements: int

    @field_validator("times", "max_populations", mode="before")
    @classmethod
    def read_only_real(cls, value):
        return _frozen_array(value)

    @field_validator("amplitudes", "final_amplitudes", mode="before")
    @classmethod
    def read_only_complex(cls, value):
        return _frozen_array(value, dtype=complex)

    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


class FidelityReport(_Frozen):
    """CNOT quality over the computational subspace."""
    fidelity: float = Field(..., ge=0.0, le=1.0 + 1e-12)
    raw_fidelity: float = Field(..., ge=0.0, le=1.0 + 1e-12)
    subspace_matrix: np.ndarray = Field(..., description="M[b', b], interaction picture, order 00, 01, 10, 11")
    phases: List[float] = Field(default_factory=list, description="Optimal diagonal phases for 01, 10, 11")
    subspace_leakage: Dict[str, float] = Field(default_factory=dict)
    duration: float
    weak_field_ratio: Optional[float] = None
    truncation_delta: Optional[float] = None

    @field_validator("subspace_matrix", mode="before")
    @classmethod
    def read_only(cls, value):
        return _frozen_array(value, dtype=complex)


class BenchmarkReport(_Frozen):
    """ITA-vs-DM cost model for an n-qubit gate."""
    spectroscopy_time: float = Field(..., description="tau_S, median seconds")
    transition_time: float = Field(..., description="tau_T, median seconds per component")
    ita_time: float
    dm_time: float
    ratio: float = Field(..., description="tau_D / tau_I")
    zeta: float = Field(..., description="tau_T / tau_S")
    qubits: int = 2
    samples: int
    environment: Dict[str, str] = Field(default_factory=dict)


# ── Optimization ──────────────────────────────────────────────────────────────

class TrajectoryStep(_Frozen):
    point: List[float]
    eta: Optional[float] = None


class OptimalWP(_Frozen):
    """Result of simplex refinement around a seed point."""
    axes: List[str]
    point: List[float]
    working_params: Optional[WorkingParams] = None
    eta: float
    seed_eta: float
    trajectory: List[TrajectoryStep] = Field(default_factory=list)
    converged: bool
    evaluations: int


class MapComparison(_Frozen):
    """Agreement statistics between an ITA and a DM leakage map."""
    points: int
    ita: List[float]
    dm: List[float]
    rank_correlation: Optional[float] = None
    degenerate: bool = False
    log_ratios: List[float] = Field(default_factory=list, description="log10(eta_ITA / eta_DM)")
    max_abs_log_ratio: Optional[float] = None
    median_abs_log_ratio: Optional[float] = None
    ordering_agreement: Optional[float] = None
    pairs: int = 0
