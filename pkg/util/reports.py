"""
Structured-text reports rendered with rich.

Each report_* function returns a list of renderables; write_report renders
them to a plain-text file and optionally echoes them to the console.
"""

import io
import logging
import math
from pathlib import Path
from typing import Optional, Union

import numpy as np
from rich.console import Console
from rich.table import Table

from squid.constants import COMPUTATIONAL_LABELS
from squid.schemas import BenchmarkReport, FidelityReport, GateLeakage, MapComparison, OptimalWP, SpectroTable
from squid.spectro import level_spacings

logger = logging.getLogger(__name__)

REPORT_WIDTH = 100


def _key_values(title: str, rows) -> Table:
    table = Table(title=title, show_header=False, title_justify="left")
    table.add_column("key", style="bold")
    table.add_column("value")
    for key, value in rows:
        table.add_row(key, value)
    return table


def _number(value: Optional[float], spec: str = ".6g") -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "-"
    return format(value, spec)


def report_spectrum(table: SpectroTable) -> list:
    wp = table.working_params
    header = _key_values("Spectrum", [
        ("working point", f"x_e1={wp.x_e1}, x_e2={wp.x_e2}, kappa={wp.kappa}"),
        ("backend", table.backend),
        ("states", str(table.size)),
        ("computational map", str(table.computational) if table.computational else f"undefined ({table.basis_error})"),
    ])
    levels = Table(title="Levels", title_justify="left")
    for column in ("n", "E (hbar w_LC)", "well", "max weight"):
        levels.add_column(column, justify="right")
    for n in range(table.size):
        levels.add_row(
            str(n + 1),
            _number(float(table.energies[n]), ".10f"),
            table.well_labels[n] or "-",
            _number(float(np.max(table.well_weights[n])), ".4f"),
        )
    renderables = [header, levels]
    if table.computational is not None:
        renderables.append(_key_values(
            "Computational spacings",
            [(f"dE{name}", _number(value, ".8g")) for name, value in level_spacings(table).items()],
        ))
    return renderables


def report_leakage(result: GateLeakage) -> list:
    breakdown = Table(title=f"{result.method} gate leakage eta = {result.eta:.6e}", title_justify="left")
    for column in ("component", "eta_i", "dominant channel", "P dominant"):
        breakdown.add_column(column, justify="right")
    for label in COMPUTATIONAL_LABELS:
        component = result.components[label]
        dominant = component.dominant_channel
        breakdown.add_row(
            f"|{label}>",
            _number(component.eta, ".6e"),
            "-" if dominant is None else str(dominant + 1),
            "-" if dominant is None else _number(component.breakdown[dominant], ".6e"),
        )
    renderables = [breakdown]
    if result.flag:
        renderables.append(f"flag: {result.flag}")
    return renderables


def report_fidelity(report: FidelityReport) -> list:
    summary = _key_values("CNOT fidelity", [
        ("F (phase optimized)", _number(report.fidelity, ".6f")),
        ("F (raw)", _number(report.raw_fidelity, ".6f")),
        ("pi-pulse duration", _number(report.duration, ".6g")),
        ("phases 01, 10, 11", ", ".join(_number(p, ".4f") for p in report.phases)),
        ("weak-field ratio", _number(report.weak_field_ratio, ".3g")),
        ("truncation delta", _number(report.truncation_delta, ".3e")),
    ])

    matrix = Table(title="M (magnitude / phase in rad)", title_justify="left")
    matrix.add_column("out \\ in")
    for label in COMPUTATIONAL_LABELS:
        matrix.add_column(f"|{label}>", justify="right")
    for row, label in enumerate(COMPUTATIONAL_LABELS):
        cells = [
            f"{abs(value):.4f} / {np.angle(value):+.3f}"
            for value in report.subspace_matrix[row]
        ]
        matrix.add_row(f"|{label}>", *cells)

    leakage = _key_values(
        "Population leaked out of the subspace",
        [(f"|{label}>", _number(value, ".3e")) for label, value in report.subspace_leakage.items()],
    )
    return [summary, matrix, leakage]


def report_optimum(optimum: OptimalWP) -> list:
    rows = [(name, _number(value, ".8g")) for name, value in zip(optimum.axes, optimum.point)]
    rows += [
        ("eta", _number(optimum.eta, ".6e")),
        ("seed eta", _number(optimum.seed_eta, ".6e")),
        ("evaluations", str(optimum.evaluations)),
        ("converged", "yes" if optimum.converged else "no"),
    ]
    return [_key_values("Refined working point", rows)]


def report_comparison(comparison: MapComparison) -> list:
    return [_key_values("ITA vs DM map comparison", [
        ("common points", str(comparison.points)),
        ("rank correlation", "undefined" if comparison.degenerate else _number(comparison.rank_correlation, ".4f")),
        ("ordering agreement", _number(comparison.ordering_agreement, ".4f")),
        ("pairs", str(comparison.pairs)),
        ("max |log10 ratio|", _number(comparison.max_abs_log_ratio, ".4f")),
        ("median |log10 ratio|", _number(comparison.median_abs_log_ratio, ".4f")),
    ])]


def report_benchmark(report: BenchmarkReport) -> list:
    rows = [
        ("tau_S (median)", f"{report.spectroscopy_time:.4f} s"),
        ("tau_T (median)", f"{report.transition_time:.4f} s"),
        ("tau_I", f"{report.ita_time:.4f} s"),
        ("tau_D", f"{report.dm_time:.4f} s"),
        ("zeta", _number(report.zeta, ".3f")),
        ("tau_D / tau_I", _number(report.ratio, ".3f")),
        ("samples", str(report.samples)),
    ]
    rows += [(key, value) for key, value in report.environment.items()]
    return [_key_values(f"ITA vs DM cost ({report.qubits} qubits)", rows)]


def render_text(renderables: list) -> str:
    console = Console(file=io.StringIO(), width=REPORT_WIDTH, record=True, color_system=None)
    for renderable in renderables:
        console.print(renderable)
    return console.export_text()


def write_report(path: Union[str, Path], renderables: list, echo: bool = True) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_text(renderables), encoding="utf-8")
    if echo:
        console = Console()
        for renderable in renderables:
            console.print(renderable)
    logger.info(f"Report saved to: {path}")
    return path


__all__ = [
    "report_spectrum",
    "report_leakage",
    "report_fidelity",
    "report_optimum",
    "report_comparison",
    "report_benchmark",
    "render_text",
    "write_report",
]
