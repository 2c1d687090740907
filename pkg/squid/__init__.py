"""
squid Package
rf-SQUID flux-qubit model, spectroscopy, ITA leakage and TDSE dynamics.
"""

from .errors import (
    SquidLeakError,
    ConfigurationError,
    InvalidParameterError,
    GridConfigurationError,
    GridMismatchError,
    NumericalError,
    FourWellStructureLost,
    ComputationalBasisUndefined,
    EigensolverError,
    IntegrationFailure,
    NoCouplingError,
    RefinementFailed,
)
from .schemas import (
    DeviceParams,
    ModelScales,
    WorkingParams,
    WellMinimum,
    FghGrid,
    Spectrum1D,
    SpectroTable,
    DrivePulse,
    TransitionRecord,
    ComponentLeakage,
    GateLeakage,
    SweepAxis,
    SweepSpec,
    LeakagePoint,
    LeakageMap,
    LevelRow,
    TdseResult,
    FidelityReport,
    BenchmarkReport,
    TrajectoryStep,
    OptimalWP,
    MapComparison,
)
from .model import derive_scales, check_bias_window, potential_1d, potential_2d, find_wells
from .spectro import build_grid, solve_1d, solve_coupled, level_spacings
from .leakage import (
    bessel_rabi_factor,
    bessel_argument,
    cnot_drive,
    transition_probability,
    component_leakage,
    gate_leakage,
    weak_field_ratio,
)
from .dynamics import (
    interaction_row,
    pi_pulse_duration,
    evolve,
    evolve_states,
    dm_gate_leakage,
    cnot_fidelity,
    gate_fidelity,
    truncation_check,
)

__version__ = "0.3.0"

__all__ = [
    "SquidLeakError",
    "ConfigurationError",
    "InvalidParameterError",
    "GridConfigurationError",
    "GridMismatchError",
    "NumericalError",
    "FourWellStructureLost",
    "ComputationalBasisUndefined",
    "EigensolverError",
    "IntegrationFailure",
    "NoCouplingError",
    "RefinementFailed",
    "DeviceParams",
    "ModelScales",
    "WorkingParams",
    "WellMinimum",
    "FghGrid",
    "Spectrum1D",
    "SpectroTable",
    "DrivePulse",
    "TransitionRecord",
    "ComponentLeakage",
    "GateLeakage",
    "SweepAxis",
    "SweepSpec",
    "LeakagePoint",
    "LeakageMap",
    "LevelRow",
    "TdseResult",
    "FidelityReport",
    "BenchmarkReport",
    "TrajectoryStep",
    "OptimalWP",
    "MapComparison",
    "derive_scales",
    "check_bias_window",
    "potential_1d",
    "potential_2d",
    "find_wells",
    "build_grid",
    "solve_1d",
    "solve_coupled",
    "level_spacings",
    "bessel_rabi_factor",
    "bessel_argument",
    "cnot_drive",
    "transition_probability",
    "component_leakage",
    "gate_leakage",
    "weak_field_ratio",
    "interaction_row",
    "pi_pulse_duration",
    "evolve",
    "evolve_states",
    "dm_gate_leakage",
    "cnot_fidelity",
    "gate_fidelity",
    "truncation_check",
]
