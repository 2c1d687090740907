"""
Run configuration: INI files validated by pydantic.

Sections: device, grid, drive, sweep, dm, output. Every section except
device is optional; unknown sections and keys are rejected. The normalized
echo produced by emit_config is a fixed point of parse/emit, and its
SHA-256 is the run's config hash.
"""

import configparser
import hashlib
import logging
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from squid.constants import (
    BOUNDARY_TOLERANCE,
    DEFAULT_AMPLITUDE,
    DEFAULT_BASIS_SIZE,
    DEFAULT_BIAS_WINDOW,
    DEFAULT_GRID_POINTS,
    DEFAULT_MAX_DURATION,
    DEFAULT_MAX_REFINEMENTS,
    DEFAULT_STATES,
    DEFAULT_STEP_DIVISOR,
    DEFAULT_WINDOW,
    MAX_PHOTONS,
    MIN_GRID_POINTS,
    WELL_THRESHOLD,
)
from squid.errors import ConfigurationError
from squid.schemas import DeviceParams, FghGrid, SweepAxis, SweepSpec, WorkingParams

logger = logging.getLogger(__name__)

SECTIONS = ("device", "grid", "drive", "sweep", "dm", "output")


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DeviceSection(_Section):
    inductance: float = Field(..., description="L (henry)")
    capacitance: float = Field(..., description="C (farad)")
    beta_l: Optional[float] = Field(None, description="Shape parameter")
    critical_current: Optional[float] = Field(None, description="I_c (ampere); alternative to beta_l")

    @model_validator(mode="after")
    def consistent(self):
        try:
            DeviceParams(**self.model_dump())
        except ValidationError as e:
            raise ValueError(e.errors()[0]["msg"].removeprefix("Value error, ")) from None
        return self

    def params(self) -> DeviceParams:
        return DeviceParams(**self.model_dump())


class GridSection(_Section):
    window_lower: float = Field(DEFAULT_WINDOW[0], description="Coordinate window start (Phi_0)")
    window_upper: float = Field(DEFAULT_WINDOW[1], description="Coordinate window end (Phi_0)")
    points: int = Field(DEFAULT_GRID_POINTS, ge=MIN_GRID_POINTS, description="Grid points N per axis")
    states: int = Field(DEFAULT_STATES, ge=4, description="Retained eigenstates K")
    backend: Literal["product", "full2d"] = "product"
    basis_size: int = Field(DEFAULT_BASIS_SIZE, ge=2, description="Single-SQUID states per qubit (product backend)")
    well_threshold: float = Field(WELL_THRESHOLD, gt=0.0, le=1.0)
    bias_lower: float = DEFAULT_BIAS_WINDOW[0]
    bias_upper: float = DEFAULT_BIAS_WINDOW[1]
    boundary_tolerance: float = Field(BOUNDARY_TOLERANCE, gt=0.0)

    @model_validator(mode="after")
    def ordered(self):
        if not self.window_upper > self.window_lower:
            raise ValueError(f"window_upper must exceed window_lower ({self.window_lower}, {self.window_upper})")
        if not self.bias_upper > self.bias_lower:
            raise ValueError(f"bias_upper must exceed bias_lower ({self.bias_lower}, {self.bias_upper})")
        return self

    @property
    def window(self) -> Tuple[float, float]:
        return self.window_lower, self.window_upper

    @property
    def bias_window(self) -> Tuple[float, float]:
        return self.bias_lower, self.bias_upper


class DriveSection(_Section):
    amplitude: float = Field(DEFAULT_AMPLITUDE, gt=0.0, description="x_m0 (Phi_0)")
    photon_aggregation: Literal["max", "sum"] = "max"
    max_photons: int = Field(MAX_PHOTONS, ge=1, le=3)
    max_duration: float = Field(DEFAULT_MAX_DURATION, gt=0.0, description="Cap on the pi-pulse length (1/omega_LC)")


class SweepSection(_Section):
    x_e1: float = 0.499
    x_e2: float = 0.49985
    kappa: float = 5e-4
    axes: List[SweepAxis] = Field(default_factory=list, max_length=2, description="name:min:max:count, ...")
    evaluator: Literal["ita", "dm"] = "ita"
    refine_radius: float = Field(1.0, gt=0.0, description="Initial simplex size in grid steps")
    max_evaluations: int = Field(200, ge=1)

    @field_validator("axes", mode="before")
    @classmethod
    def parse_axes(cls, value):
        if not isinstance(value, str):
            return value
        axes = []
        for item in filter(None, (part.strip() for part in value.split(","))):
            fields = item.split(":")
            if len(fields) != 4:
                raise ValueError(f"Axis {item!r} must be name:min:max:count")
            name, minimum, maximum, count = (f.strip() for f in fields)
            axes.append({"name": name, "minimum": minimum, "maximum": maximum, "count": count})
        return axes

    @model_validator(mode="after")
    def distinct_axes(self):
        names = [axis.name for axis in self.axes]
        if len(set(names)) != len(names):
            raise ValueError(f"Duplicate sweep axes: {names}")
        return self


class DmSection(_Section):
    step_divisor: int = Field(DEFAULT_STEP_DIVISOR, ge=8, description="Steps per drive period before halving")
    max_refinements: int = Field(DEFAULT_MAX_REFINEMENTS, ge=1)
    k_check: bool = Field(False, description="Re-run the fidelity pulse with K+10 states")
    initial_state: Literal["00", "01", "10", "11"] = "10"
    bench_points: int = Field(3, ge=3)
    pair_samples: int = Field(0, ge=0, description="Random pairs for ordering agreement (0 = all pairs)")
    seed: int = 0


class OutputSection(_Section):
    directory: str = "results"
    precision: Union[Literal["shortest"], int] = Field("shortest", description="'shortest' or significant digits")

    @field_validator("precision", mode="before")
    @classmethod
    def digits(cls, value):
        if isinstance(value, str) and value.strip().isdigit():
            return int(value)
        return value


class RunConfig(_Section):
    """Validated configuration of one CLI invocation."""
    device: DeviceSection
    grid: GridSection = Field(default_factory=GridSection)
    drive: DriveSection = Field(default_factory=DriveSection)
    sweep: SweepSection = Field(default_factory=SweepSection)
    dm: DmSection = Field(default_factory=DmSection)
    output: OutputSection = Field(default_factory=OutputSection)

    @model_validator(mode="after")
    def biases_inside_window(self):
        lower, upper = self.grid.bias_window
        for name in ("x_e1", "x_e2"):
            value = getattr(self.sweep, name)
            if not lower <= value <= upper:
                raise ValueError(f"sweep.{name}={value} outside bias window [{lower}, {upper}]")
        if not abs(self.sweep.kappa) < 1.0:
            raise ValueError(f"sweep.kappa={self.sweep.kappa} needs |kappa| < 1")
        for axis in self.sweep.axes:
            if axis.name == "kappa":
                if not (abs(axis.minimum) < 1.0 and abs(axis.maximum) < 1.0):
                    raise ValueError(f"sweep.axes: kappa range [{axis.minimum}, {axis.maximum}] needs |kappa| < 1")
            elif not (lower <= axis.minimum and axis.maximum <= upper):
                raise ValueError(
                    f"sweep.axes: {axis.name} range [{axis.minimum}, {axis.maximum}] "
                    f"outside bias window [{lower}, {upper}]"
                )
        return self

    # ── Derived objects ──────────────────────────────────────────────────

    def device_params(self) -> DeviceParams:
        return self.device.params()

    def fgh_grid(self) -> FghGrid:
        return FghGrid(lower=self.grid.window_lower, upper=self.grid.window_upper, points=self.grid.points)

    def working_params(self) -> WorkingParams:
        return WorkingParams(x_e1=self.sweep.x_e1, x_e2=self.sweep.x_e2, kappa=self.sweep.kappa)

    def sweep_spec(self, evaluator: Optional[str] = None) -> SweepSpec:
        return SweepSpec(
            fixed=self.working_params(),
            axes=self.sweep.axes,
            evaluator=evaluator or self.sweep.evaluator,
            amplitude=self.drive.amplitude,
        )

    def with_backend(self, backend: Optional[str]) -> "RunConfig":
        if backend is None:
            return self
        grid = GridSection(**{**self.grid.model_dump(), "backend": backend})
        return self.model_copy(update={"grid": grid})


# ── Parse / emit ──────────────────────────────────────────────────────────────

def _error_path(error: Dict) -> str:
    return ".".join(str(part) for part in error["loc"]) or "config"


def parse_text(text: str, source: str = "<string>") -> RunConfig:
    """
    Parse INI text into a RunConfig.

    Raises:
        ConfigurationError: naming the offending section/key
    """
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as e:
        raise ConfigurationError(f"{source}: {e}") from e

    data = {section: dict(parser.items(section)) for section in parser.sections()}
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        messages = [f"{_error_path(err)}: {err['msg']}" for err in e.errors()]
        raise ConfigurationError(f"{source}: " + "; ".join(messages)) from e


def parse_config(path: Union[str, Path]) -> RunConfig:
    """Read and validate a config file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"Config file not found: {path}")
    logger.debug(f"Reading config {path}")
    return parse_text(path.read_text(encoding="utf-8"), source=str(path))


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return ", ".join(
            f"{axis.name}:{axis.minimum!r}:{axis.maximum!r}:{axis.count}" for axis in value
        )
    return str(value)


def emit_config(config: RunConfig) -> str:
    """Normalized INI text: every section, every key, defaults filled in."""
    lines: List[str] = []
    for section in SECTIONS:
        model = getattr(config, section)
        lines.append(f"[{section}]")
        for name in type(model).model_fields:
            value = getattr(model, name)
            if value is None:
                continue
            lines.append(f"{name} = {_format_value(value)}")
        lines.append("")
    return "\n".join(lines)


def config_hash(config: RunConfig) -> str:
    return hashlib.sha256(emit_config(config).encode("utf-8")).hexdigest()


__all__ = [
    "RunConfig",
    "DeviceSection",
    "GridSection",
    "DriveSection",
    "SweepSection",
    "DmSection",
    "OutputSection",
    "parse_text",
    "parse_config",
    "emit_config",
    "config_hash",
]
