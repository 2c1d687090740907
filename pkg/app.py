"""
squidleak command-line interface.

Usage:
    python app.py spectrum   --config configs/pointA.cfg --out runs/pointA
    python app.py ita-map    --config configs/paper_fig2.cfg --out runs/fig2 --threads 8
    python app.py fidelity   --config configs/pointA.cfg
    python app.py bench      --config configs/pointA.cfg

Exit codes: 0 success, 1 configuration or usage error, 2 numerical failure.
Every command writes config.normalized.cfg, squidleak.log and one
<command>.envelope.json into the output directory.
"""

import logging
import os
import sys
import time
from enum import Enum
from pathlib import Path
from typing import Annotated, Any, Dict, List, Optional

import click
import numpy as np
import typer
from dotenv import load_dotenv

from squid.dynamics import basis_state, cnot_fidelity, cnot_pulse, evolve, truncation_check
from squid.errors import ConfigurationError, NumericalError
from squid.model import check_bias_window
from squid.schemas import WorkingParams
from services import (
    EvaluationContext,
    benchmark_speedup,
    compare_maps,
    level_spacing_map,
    optimize,
    paired_leakage_maps,
    sweep,
)
from util.config import RunConfig, config_hash, emit_config, parse_config
from util.logging_config import setup_logging
from util.output import (
    BENCH_HEADER,
    MAP_HEADER,
    SPECTRUM_HEADER,
    ResultEnvelope,
    bench_rows,
    compact_trace_rows,
    emit_csv,
    level_header,
    level_rows,
    map_rows,
    matrix_header,
    matrix_rows,
    read_map_csv,
    spectrum_rows,
    trace_header,
    trace_rows,
    trajectory_header,
    trajectory_rows,
    write_envelope,
)
from util.reports import (
    report_benchmark,
    report_comparison,
    report_fidelity,
    report_leakage,
    report_optimum,
    report_spectrum,
    write_report,
)

load_dotenv()

logger = logging.getLogger(__name__)

THREADS_ENV = "SQUIDLEAK_THREADS"

app = typer.Typer(
    name="squidleak",
    help="Optimize coupled rf-SQUID working parameters for low CNOT leakage.",
    add_completion=False,
    no_args_is_help=True,
    pretty_exceptions_enable=False,
)


class Backend(str, Enum):
    product = "product"
    full2d = "full2d"


ConfigOption = Annotated[Path, typer.Option("--config", "-c", help="INI configuration file")]
OutOption = Annotated[Optional[Path], typer.Option("--out", "-o", help="Output directory (default: output.directory)")]
ThreadsOption = Annotated[Optional[int], typer.Option("--threads", "-t", min=1, help="Worker processes")]
BackendOption = Annotated[Optional[Backend], typer.Option("--backend", help="Spectroscopy backend override")]
LogLevelOption = Annotated[Optional[str], typer.Option("--log-level", help="DEBUG, INFO, WARNING, ...")]


# ── Invocation state ──────────────────────────────────────────────────────────

class Run:
    """One command invocation: config, output directory and written payload."""

    def __init__(self, command: str, config: RunConfig, out: Path, workers: int):
        self.command = command
        self.config = config
        self.out = out
        self.workers = workers
        self.context = EvaluationContext.from_config(config)
        self.normalized = emit_config(config)
        self.hash = config_hash(config)
        self.payload: List[str] = []
        self.started = time.perf_counter()

    @property
    def precision(self):
        return self.config.output.precision

    def working_params(self) -> WorkingParams:
        wp = self.config.working_params()
        check_bias_window(wp, self.config.grid.bias_window)
        return wp

    def emit(self, name: str, header, rows) -> None:
        emit_csv(header, rows, self.out / name, self.precision)
        self.payload.append(name)

    def report(self, name: str, renderables: list) -> None:
        write_report(self.out / name, renderables)
        self.payload.append(name)

    def finish(self, method: Optional[str] = None, summary: Optional[Dict[str, Any]] = None) -> None:
        wall_time = time.perf_counter() - self.started
        write_envelope(self.out, ResultEnvelope(
            command=self.command,
            method=method,
            config_hash=self.hash,
            config=self.normalized,
            wall_time=wall_time,
            payload=self.payload,
            summary=summary or {},
        ))
        logger.info(f"{self.command} finished in {wall_time:.1f}s -> {self.out}")


def _workers(threads: Optional[int]) -> int:
    if threads:
        return threads
    value = os.getenv(THREADS_ENV)
    if value:
        try:
            workers = int(value)
        except ValueError:
            raise ConfigurationError(f"{THREADS_ENV}={value!r} is not an integer") from None
        if workers < 1:
            raise ConfigurationError(f"{THREADS_ENV} must be >= 1, got {workers}")
        return workers
    return os.cpu_count() or 1


def _prepare(
    command: str,
    config_path: Path,
    out: Optional[Path],
    threads: Optional[int],
    backend: Optional[Backend],
    log_level: Optional[str],
) -> Run:
    config = parse_config(config_path).with_backend(backend.value if backend else None)
    directory = out or Path(config.output.directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        setup_logging(log_level, str(directory / "squidleak.log"))
    except OSError as e:
        raise ConfigurationError(f"Cannot use output directory {directory}: {e}") from e
    except ValueError as e:
        raise ConfigurationError(str(e)) from e

    run = Run(command, config, directory, _workers(threads))
    (directory / "config.normalized.cfg").write_text(run.normalized, encoding="utf-8")
    logger.info(f"{command}: config {config_path} (sha256 {run.hash[:12]}), backend {config.grid.backend}")
    return run


def _map_summary(leakage_map) -> Dict[str, Any]:
    unflagged = leakage_map.unflagged()
    summary: Dict[str, Any] = {"points": len(leakage_map.points), "flagged": len(leakage_map.points) - len(unflagged)}
    if unflagged:
        best = min(unflagged, key=lambda k: leakage_map.points[k].eta)
        summary["minimum"] = {
            "eta": leakage_map.points[best].eta,
            **leakage_map.points[best].working_params.model_dump(),
        }
    return summary


# ── Commands ──────────────────────────────────────────────────────────────────

@app.command("spectrum")
def spectrum_command(
    config: ConfigOption,
    out: OutOption = None,
    threads: ThreadsOption = None,
    backend: BackendOption = None,
    log_level: LogLevelOption = None,
):
    """Spectroscopic table at the fixed working point."""
    run = _prepare("spectrum", config, out, threads, backend, log_level)
    table = run.context.solve(run.working_params(), require_basis=False)

    run.emit("spectrum.csv", SPECTRUM_HEADER, spectrum_rows(table))
    run.emit("drive.csv", matrix_header(table.size), matrix_rows(table.drive))

    renderables = report_spectrum(table)
    if table.computational is not None:
        renderables += report_leakage(run.context.ita(table, run.config.drive.amplitude))
    run.report("spectrum.txt", renderables)
    run.finish(summary={"computational": table.computational, "basis_error": table.basis_error})


@app.command("levels-map")
def levels_map_command(
    config: ConfigOption,
    out: OutOption = None,
    threads: ThreadsOption = None,
    backend: BackendOption = None,
    log_level: LogLevelOption = None,
):
    """Eigenenergies and computational level spacings over the sweep grid."""
    run = _prepare("levels-map", config, out, threads, backend, log_level)
    rows = level_spacing_map(run.config.sweep_spec(), run.context, run.workers)
    states = run.config.grid.states
    run.emit("levels.csv", level_header(states), level_rows(rows, states))
    run.finish(summary={"points": len(rows), "flagged": sum(1 for r in rows if r.flag)})


def _leakage_map_command(command: str, evaluator: str, config, out, threads, backend, log_level) -> None:
    run = _prepare(command, config, out, threads, backend, log_level)
    leakage_map = sweep(run.config.sweep_spec(evaluator), run.context, run.workers, run.hash)
    run.emit(f"{evaluator}_map.csv", MAP_HEADER, map_rows(leakage_map))
    run.finish(method=leakage_map.method, summary=_map_summary(leakage_map))


@app.command("ita-map")
def ita_map_command(
    config: ConfigOption,
    out: OutOption = None,
    threads: ThreadsOption = None,
    backend: BackendOption = None,
    log_level: LogLevelOption = None,
):
    """ITA gate-leakage map over the sweep grid."""
    _leakage_map_command("ita-map", "ita", config, out, threads, backend, log_level)


@app.command("dm-map")
def dm_map_command(
    config: ConfigOption,
    out: OutOption = None,
    threads: ThreadsOption = None,
    backend: BackendOption = None,
    log_level: LogLevelOption = None,
):
    """DM gate-leakage map over the sweep grid."""
    _leakage_map_command("dm-map", "dm", config, out, threads, backend, log_level)


@app.command("evolve")
def evolve_command(
    config: ConfigOption,
    out: OutOption = None,
    threads: ThreadsOption = None,
    backend: BackendOption = None,
    log_level: LogLevelOption = None,
):
    """Population traces over the CNOT pi-pulse from dm.initial_state."""
    run = _prepare("evolve", config, out, threads, backend, log_level)
    ctx = run.context
    table = ctx.solve(run.working_params())
    pulse, flag = cnot_pulse(table, run.config.drive.amplitude, ctx.max_duration)
    initial = run.config.dm.initial_state

    result = evolve(table, pulse, basis_state(table, initial), ctx.step_divisor, ctx.max_refinements)
    run.emit("trace.csv", trace_header(table.size), trace_rows(result))
    run.emit("trace_compact.csv", ["tau", "p_10", "p_11"], compact_trace_rows(result, table))

    final = np.abs(result.final_amplitudes) ** 2
    run.finish(method="DM", summary={
        "initial_state": initial,
        "duration": pulse.duration,
        "flag": flag,
        "final_p_10": float(final[table.index("10")]),
        "final_p_11": float(final[table.index("11")]),
        "norm_drift": result.norm_drift,
        "step": result.step,
    })


@app.command("fidelity")
def fidelity_command(
    config: ConfigOption,
    out: OutOption = None,
    threads: ThreadsOption = None,
    backend: BackendOption = None,
    log_level: LogLevelOption = None,
):
    """CNOT fidelity after a pi-pulse at the fixed working point."""
    run = _prepare("fidelity", config, out, threads, backend, log_level)
    ctx = run.context
    wp = run.working_params()
    amplitude = run.config.drive.amplitude
    table = ctx.solve(wp)

    report = cnot_fidelity(table, amplitude, ctx.max_duration, ctx.step_divisor, ctx.max_refinements)
    if run.config.dm.k_check:
        delta = truncation_check(
            ctx.scales, wp, ctx.grid, amplitude, ctx.states,
            max_duration=ctx.max_duration, **ctx.solver_options(),
        )
        report = report.model_copy(update={"truncation_delta": delta})

    run.report("fidelity.txt", report_fidelity(report))
    run.finish(method="DM", summary={
        "fidelity": report.fidelity,
        "raw_fidelity": report.raw_fidelity,
        "duration": report.duration,
        "truncation_delta": report.truncation_delta,
    })


@app.command("optimize")
def optimize_command(
    config: ConfigOption,
    out: OutOption = None,
    threads: ThreadsOption = None,
    backend: BackendOption = None,
    log_level: LogLevelOption = None,
):
    """Grid sweep plus simplex refinement of the leakage minimum."""
    run = _prepare("optimize", config, out, threads, backend, log_level)
    spec = run.config.sweep_spec()
    leakage_map, optimum = optimize(
        spec, run.context, run.workers,
        run.config.sweep.refine_radius, run.config.sweep.max_evaluations, run.hash,
    )
    run.emit(f"{spec.evaluator}_map.csv", MAP_HEADER, map_rows(leakage_map))
    run.emit("trajectory.csv", trajectory_header(optimum), trajectory_rows(optimum))
    run.report("optimum.txt", report_optimum(optimum))
    run.finish(method=leakage_map.method, summary={
        "eta": optimum.eta,
        "seed_eta": optimum.seed_eta,
        "converged": optimum.converged,
        **dict(zip(optimum.axes, optimum.point)),
    })


@app.command("compare")
def compare_command(
    config: ConfigOption,
    out: OutOption = None,
    threads: ThreadsOption = None,
    backend: BackendOption = None,
    log_level: LogLevelOption = None,
    ita_map: Annotated[Optional[Path], typer.Option("--ita-map", help="Existing ITA map CSV")] = None,
    dm_map: Annotated[Optional[Path], typer.Option("--dm-map", help="Existing DM map CSV")] = None,
):
    """ITA vs DM agreement on the sweep grid (computed, or read from CSVs)."""
    run = _prepare("compare", config, out, threads, backend, log_level)
    amplitude = run.config.drive.amplitude

    if (ita_map is None) != (dm_map is None):
        raise ConfigurationError("--ita-map and --dm-map must be given together")
    if ita_map is not None:
        ita = read_map_csv(ita_map, "ITA", amplitude)
        dm = read_map_csv(dm_map, "DM", amplitude)
    else:
        ita, dm = paired_leakage_maps(run.config.sweep_spec(), run.context, run.workers, run.hash)
        run.emit("ita_map.csv", MAP_HEADER, map_rows(ita))
        run.emit("dm_map.csv", MAP_HEADER, map_rows(dm))

    comparison = compare_maps(ita, dm, run.config.dm.pair_samples, run.config.dm.seed)
    run.report("comparison.txt", report_comparison(comparison))
    run.finish(method="ITA+DM", summary=comparison.model_dump(exclude={"ita", "dm", "log_ratios"}))


def _bench_points(config: RunConfig) -> List[WorkingParams]:
    grid = config.sweep_spec().working_points()
    count = config.dm.bench_points
    if len(grid) >= count:
        return [grid[k] for k in np.linspace(0, len(grid) - 1, count).round().astype(int)]
    return [config.working_params()] * count


@app.command("bench")
def bench_command(
    config: ConfigOption,
    out: OutOption = None,
    threads: ThreadsOption = None,
    backend: BackendOption = None,
    log_level: LogLevelOption = None,
):
    """Time spectroscopy against per-component DM and report tau_D / tau_I."""
    run = _prepare("bench", config, out, threads, backend, log_level)
    report = benchmark_speedup(
        run.context, _bench_points(run.config), run.config.drive.amplitude, run.config.dm.initial_state,
    )
    run.emit("bench.csv", BENCH_HEADER, bench_rows(report))
    run.report("bench.txt", report_benchmark(report))
    run.finish(summary={"zeta": report.zeta, "ratio": report.ratio})


# ── Entry point ───────────────────────────────────────────────────────────────

def main(argv: Optional[List[str]] = None) -> int:
    """Dispatch argv to a subcommand and map failures to exit codes."""
    command = typer.main.get_command(app)
    try:
        result = command.main(args=argv, prog_name="squidleak", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return 1
    except click.exceptions.Abort:
        return 1
    except ConfigurationError as e:
        logger.error(f"Configuration error: {e}")
        typer.echo(f"Error: {e}", err=True)
        return 1
    except NumericalError as e:
        logger.error(f"Numerical failure ({e.flag}): {e}")
        typer.echo(f"Numerical failure: {e}", err=True)
        return 2
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(main())
