"""
CSV and envelope writers.

CSV rules: header row, comma separated, UTF-8, "\\n" line endings, rows in
the order given. Floats use the shortest representation that round-trips
(repr), or a fixed number of significant digits when requested.
"""

import csv
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, Field

from squid import __version__
from squid.constants import COMPUTATIONAL_LABELS, WELL_LABELS
from squid.errors import ConfigurationError
from squid.schemas import (
    BenchmarkReport,
    LeakageMap,
    LeakagePoint,
    LevelRow,
    OptimalWP,
    SpectroTable,
    TdseResult,
    WorkingParams,
)
from squid.spectro import SPACING_NAMES

logger = logging.getLogger(__name__)

Precision = Union[str, int]

MAP_HEADER = ["x_e1", "x_e2", "kappa", "eta", "eta_00", "eta_01", "eta_10", "eta_11", "flag"]


def format_value(value: Any, precision: Precision = "shortest") -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if precision == "shortest":
            return repr(value)
        return format(value, f".{int(precision)}g")
    return str(value)


def emit_csv(
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    path: Union[str, Path],
    precision: Precision = "shortest",
) -> Path:
    """
    Write a CSV file.

    Raises:
        ConfigurationError: if the path cannot be written or a row length
            does not match the header
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for number, row in enumerate(rows):
                if len(row) != len(header):
                    raise ConfigurationError(f"{path}: row {number} has {len(row)} fields, header has {len(header)}")
                writer.writerow([format_value(v, precision) for v in row])
    except OSError as e:
        raise ConfigurationError(f"Cannot write {path}: {e}") from e
    logger.debug(f"Wrote {path}")
    return path


# ── Row builders ──────────────────────────────────────────────────────────────

def _wp(wp: WorkingParams) -> List[float]:
    return [wp.x_e1, wp.x_e2, wp.kappa]


def map_rows(leakage_map: LeakageMap) -> List[list]:
    return [
        _wp(p.working_params) + [p.eta] + [p.components.get(label) for label in COMPUTATIONAL_LABELS] + [p.flag]
        for p in leakage_map.points
    ]


def level_header(states: int) -> List[str]:
    return (
        ["x_e1", "x_e2", "kappa"]
        + [f"E_{n}" for n in range(1, states + 1)]
        + [f"dE{name}" for name in SPACING_NAMES]
        + ["flag"]
    )


def level_rows(rows: Sequence[LevelRow], states: int) -> List[list]:
    table = []
    for row in rows:
        energies = list(row.energies) + [None] * (states - len(row.energies))
        table.append(
            _wp(row.working_params)
            + energies[:states]
            + [row.spacings.get(name) for name in SPACING_NAMES]
            + [row.flag]
        )
    return table


def trace_header(states: int) -> List[str]:
    return ["tau"] + [f"p_{n}" for n in range(1, states + 1)]


def trace_rows(result: TdseResult) -> List[list]:
    populations = result.populations()
    return [[tau] + row.tolist() for tau, row in zip(result.times.tolist(), populations)]


def compact_trace_rows(result: TdseResult, table: SpectroTable) -> List[list]:
    """tau, p_10, p_11 for the two CNOT-driven states."""
    populations = result.populations()
    first, second = table.index("10"), table.index("11")
    return [
        [tau, float(row[first]), float(row[second])]
        for tau, row in zip(result.times.tolist(), populations)
    ]


SPECTRUM_HEADER = ["n", "energy", "well", "computational"] + [f"w_{label}" for label in WELL_LABELS]


def spectrum_rows(table: SpectroTable) -> List[list]:
    reverse = {index: label for label, index in (table.computational or {}).items()}
    return [
        [n, float(table.energies[n]), table.well_labels[n], reverse.get(n)] + table.well_weights[n].tolist()
        for n in range(table.size)
    ]


def matrix_rows(matrix: np.ndarray) -> List[list]:
    return [[n] + row.tolist() for n, row in enumerate(np.asarray(matrix))]


def matrix_header(size: int) -> List[str]:
    return ["n"] + [f"O_{n}" for n in range(1, size + 1)]


def trajectory_rows(optimum: OptimalWP) -> List[list]:
    return [[k] + step.point + [step.eta] for k, step in enumerate(optimum.trajectory)]


def trajectory_header(optimum: OptimalWP) -> List[str]:
    return ["evaluation"] + list(optimum.axes) + ["eta"]


BENCH_HEADER = [
    "tau_s", "tau_t", "tau_i", "tau_d", "ratio", "zeta", "qubits", "samples",
]


def bench_rows(report: BenchmarkReport) -> List[list]:
    return [[
        report.spectroscopy_time, report.transition_time, report.ita_time, report.dm_time,
        report.ratio, report.zeta, report.qubits, report.samples,
    ]]


def read_map_csv(path: Union[str, Path], method: str, amplitude: float) -> LeakageMap:
    """Load a map written by emit_csv(MAP_HEADER, map_rows(...)); axes are not recovered."""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"Map file not found: {path}")
    points = []
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != MAP_HEADER:
            raise ConfigurationError(f"{path}: unexpected header {reader.fieldnames}")
        for row in reader:
            points.append(LeakagePoint(
                working_params=WorkingParams(x_e1=row["x_e1"], x_e2=row["x_e2"], kappa=row["kappa"]),
                eta=float(row["eta"]),
                components={
                    label: float(row[f"eta_{label}"]) for label in COMPUTATIONAL_LABELS if row[f"eta_{label}"]
                },
                flag=row["flag"] or None,
            ))
    return LeakageMap(axes=[], points=points, method=method, amplitude=amplitude)


# ── Envelope ──────────────────────────────────────────────────────────────────

class ResultEnvelope(BaseModel):
    """Provenance record written once per command invocation."""
    command: str
    version: str = __version__
    method: Optional[str] = Field(None, description="ITA, DM or both")
    config_hash: str = Field(..., description="SHA-256 of the normalized config echo")
    config: str = Field(..., description="Normalized config echo")
    wall_time: float
    payload: List[str] = Field(default_factory=list, description="Files written, relative to the output directory")
    created_at: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    summary: Dict[str, Any] = Field(default_factory=dict)


def write_envelope(directory: Union[str, Path], envelope: ResultEnvelope) -> Path:
    path = Path(directory) / f"{envelope.command}.envelope.json"
    try:
        path.write_text(envelope.model_dump_json(indent=2), encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"Cannot write {path}: {e}") from e
    logger.info(f"Envelope saved to: {path}")
    return path


__all__ = [
    "MAP_HEADER",
    "SPECTRUM_HEADER",
    "BENCH_HEADER",
    "format_value",
    "emit_csv",
    "map_rows",
    "level_header",
    "level_rows",
    "trace_header",
    "trace_rows",
    "compact_trace_rows",
    "spectrum_rows",
    "matrix_header",
    "matrix_rows",
    "trajectory_header",
    "trajectory_rows",
    "bench_rows",
    "read_map_csv",
    "ResultEnvelope",
    "write_envelope",
]
