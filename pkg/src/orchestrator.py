"""
Command-line entrypoint for the Friedrichs decay toolkit
"""

import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import click
import numpy as np

from . import __version__
from .asymptotics import (
    DEFAULT_SEED,
    asymptote_coeffs,
    crossover_amplitude,
    crossover_time,
    maximizing_state,
    orthogonal_complement,
    schwarz_sweep,
    sla_comparison,
)
from .config_loader import ConfigLoader
from .errors import BudgetExceeded, FriedrichsError, ValidationError
from .hydrogen import reproduce_table
from .logger import setup_logger
from .model import normalize_state
from .models import AsymptoteMode, Branch, CrossoverMode, InitialState, RunConfig
from .oracle import compare_with_spectral, discretize, no_bound_state_check
from .report_generator import ReportGenerator
from .result_comparator import ResultComparator
from .spectral import decay_rates, density_grid, spectral_density, survival_amplitude
from .utils import config_hash, fit_power_law, parse_range

SCHEMA_HINT = "Model files follow the schema in doc/configuration.md; built-in source: hydrogen(N)."


class FriedrichsGroup(click.Group):
    """Maps toolkit errors and usage errors onto exit codes 1 and 2"""

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except click.UsageError as exc:
            exc.show()
            click.echo(SCHEMA_HINT, err=True)
            ctx.exit(1)
        except FriedrichsError as exc:
            log = setup_logger()
            log.error("%s: %s", type(exc).__name__, exc.message)
            log.debug("Error details: %s", exc.to_dict())
            click.echo(f"error: {exc.message}", err=True)
            ctx.exit(exc.exit_code)


# --- Shared plumbing -------------------------------------------------------

def _model_options(func):
    decorators = [
        click.option("--model", "source", required=True, help="Model YAML file or hydrogen(N)"),
        click.option("--output-dir", type=click.Path(file_okay=False), default=None, help="Override run.output_dir"),
        click.option("--format", "output_format", type=click.Choice(["csv", "json"]), default=None, help="Override run.format"),
        click.option("--threads", type=click.IntRange(min=1), default=None, help="Override run.threads"),
    ]
    for decorator in reversed(decorators):
        func = decorator(func)
    return func


def _echo_header(payload: Dict[str, Any], seed: int) -> None:
    click.echo(f"# friedrichs {__version__} config_hash={config_hash(payload)} seed={seed}", err=True)


def _load_run(
    ctx: click.Context,
    source: str,
    output_dir: Optional[str],
    output_format: Optional[str],
    threads: Optional[int],
) -> RunConfig:
    run = ConfigLoader(source).load()
    if output_dir:
        run.output_dir = Path(output_dir)
    if output_format:
        run.output_format = output_format
    if threads:
        run.threads = threads
    level = (ctx.obj or {}).get("log_level")
    if level:
        run.logging["level"] = level
    setup_logger(config={"logging": run.logging})
    _echo_header({"source": source, "config": run.raw, "command": ctx.info_name, "params": ctx.params}, run.seed)
    return run


def _resolve_state(run: RunConfig, text: Optional[str]) -> InitialState:
    """
    ``maximizer``, ``level:K`` (1-based), or comma-separated coefficients
    such as ``1,1j``. Without a value the configured state or level 1 is used.
    """
    spec = run.model
    if text is None:
        return run.state if run.state is not None else InitialState.basis(spec.n_levels, 0)
    text = text.strip()
    if text == "maximizer":
        return maximizing_state(asymptote_coeffs(spec, AsymptoteMode.EXACT, run.tolerance))
    if text.startswith("level:"):
        index = int(text.split(":", 1)[1])
        if not 1 <= index <= spec.n_levels:
            raise ValidationError(f"level {index} outside 1..{spec.n_levels}")
        return InitialState.basis(spec.n_levels, index - 1)
    try:
        coefficients = [complex(part.replace(" ", "")) for part in text.split(",")]
    except ValueError as exc:
        raise ValidationError(f"cannot parse state {text!r}") from exc
    if len(coefficients) != spec.n_levels:
        raise ValidationError(f"state has {len(coefficients)} components, model has {spec.n_levels} levels")
    return normalize_state(coefficients)


def _time_grid(t_log: Optional[str], t_lin: Optional[str], points: int) -> np.ndarray:
    if t_log and t_lin:
        raise click.UsageError("use either --t-log or --t-lin, not both")
    if t_log:
        low, high = parse_range(t_log)
        return np.geomspace(low, high, points)
    if t_lin:
        low, high = parse_range(t_lin, allow_zero=True)
        return np.linspace(low, high, points)
    raise click.UsageError("one of --t-log LO..HI or --t-lin LO..HI is required")


def _reporter(run: RunConfig) -> ReportGenerator:
    return ReportGenerator(run.output_dir, run.output_format)


# --- Commands --------------------------------------------------------------

@click.group(cls=FriedrichsGroup)
@click.version_option(__version__, prog_name="friedrichs")
@click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"]), default=None)
@click.pass_context
def cli(ctx: click.Context, log_level: Optional[str]) -> None:
    """Survival amplitudes and long-time asymptotics of N-level Friedrichs models."""
    ctx.ensure_object(dict)
    ctx.obj["log_level"] = log_level


@cli.command()
@_model_options
@click.option("--state", default=None, help="maximizer, level:K or comma-separated coefficients")
@click.option("--omega-log", default=None, help="Log-spaced energy grid LO..HI (default: adaptive grid)")
@click.option("--points", type=click.IntRange(min=2), default=400)
@click.option("--branch", type=click.Choice(["+", "-"]), default="+")
@click.pass_context
def density(ctx, source, output_dir, output_format, threads, state, omega_log, points, branch) -> int:
    """Spectral density |<psi_omega|psi>|^2 on an energy grid."""
    run = _load_run(ctx, source, output_dir, output_format, threads)
    psi = _resolve_state(run, state)
    if omega_log:
        low, high = parse_range(omega_log)
        grid = np.geomspace(low, high, points)
    else:
        grid = density_grid(run.model)
    samples = spectral_density(run.model, psi, grid, Branch(branch), threads=run.threads, tolerance=run.tolerance)
    path = _reporter(run).write_columns(
        "density", {"omega": samples.grid, "density": samples.density, "overlap": samples.overlap}
    )
    click.echo(str(path))
    return 0


@cli.command()
@_model_options
@click.option("--state", default=None, help="maximizer, level:K or comma-separated coefficients")
@click.option("--t-log", default=None, help="Log-spaced times LO..HI")
@click.option("--t-lin", default=None, help="Linearly spaced times LO..HI")
@click.option("--points", type=click.IntRange(min=2), default=200)
@click.option("--budget", type=click.IntRange(min=1), default=None, help="Cap on panel evaluations")
@click.option("--fit", "fit_range", default=None, help="Fit log|A| against log t over LO..HI")
@click.pass_context
def survive(ctx, source, output_dir, output_format, threads, state, t_log, t_lin, points, budget, fit_range) -> int:
    """Survival amplitude A(t) and probability |A(t)|^2."""
    run = _load_run(ctx, source, output_dir, output_format, threads)
    psi = _resolve_state(run, state)
    times = _time_grid(t_log, t_lin, points)
    reporter = _reporter(run)

    try:
        series = survival_amplitude(
            run.model, psi, times, budget=budget, threads=run.threads, tolerance=run.tolerance
        )
    except BudgetExceeded as exc:
        partial = exc.partial
        reporter.write_columns("survival", {
            "t": partial.times, "A": partial.amplitude,
            "P": partial.probability, "error_estimate": partial.error_estimate,
        })
        raise

    path = reporter.write_columns("survival", {
        "t": series.times, "A": series.amplitude,
        "P": series.probability, "error_estimate": series.error_estimate,
    })
    click.echo(str(path))

    if fit_range:
        low, high = parse_range(fit_range)
        window = (series.times >= low) & (series.times <= high)
        if np.count_nonzero(window) < 2:
            raise ValidationError(f"fit window {fit_range} holds fewer than two times")
        slope, prefactor = fit_power_law(series.times[window], series.amplitude[window])
        click.echo(str(reporter.write_record("survival_fit", {"window": [low, high], "slope": slope, "prefactor": prefactor})))
    return 0


@cli.command()
@_model_options
@click.option("--mode", type=click.Choice([m.value for m in AsymptoteMode]), default=AsymptoteMode.EXACT.value)
@click.option("--sla/--no-sla", default=False, help="Include the single-level comparison")
@click.pass_context
def asymptote(ctx, source, output_dir, output_format, threads, mode, sla) -> int:
    """Power-law asymptote coefficients chi = g f."""
    run = _load_run(ctx, source, output_dir, output_format, threads)
    report = asymptote_coeffs(run.model, AsymptoteMode(mode), run.tolerance)
    record = report.to_dict()
    if sla:
        record["sla"] = sla_comparison(run.model, run.tolerance)
    click.echo(str(_reporter(run).write_record("asymptote", record)))
    return 0


@cli.command()
@_model_options
@click.option("--sweep", type=click.IntRange(min=0), default=0, help="Random states for the Schwarz check")
@click.option("--seed", type=int, default=None, help="Override run.seed")
@click.pass_context
def maximize(ctx, source, output_dir, output_format, threads, sweep, seed) -> int:
    """State with the largest asymptote coefficient."""
    run = _load_run(ctx, source, output_dir, output_format, threads)
    report = asymptote_coeffs(run.model, AsymptoteMode.EXACT, run.tolerance)
    state = maximizing_state(report)
    record: Dict[str, Any] = {
        "state": np.array(state.c),
        "coefficient": report.coefficient(state),
        "chi_norm_sq": report.chi_norm_sq,
    }
    if sweep:
        record["sweep"] = schwarz_sweep(report, sweep, run.seed if seed is None else seed, threads=run.threads)
    click.echo(str(_reporter(run).write_record("maximize", record)))
    return 0


@cli.command()
@_model_options
@click.pass_context
def orthogonal(ctx, source, output_dir, output_format, threads) -> int:
    """Orthonormal states with a vanishing asymptote coefficient."""
    run = _load_run(ctx, source, output_dir, output_format, threads)
    report = asymptote_coeffs(run.model, AsymptoteMode.EXACT, run.tolerance)
    states = orthogonal_complement(report)
    record = {
        "states": [np.array(s.c) for s in states],
        "coefficients": [report.coefficient(s) for s in states],
    }
    click.echo(str(_reporter(run).write_record("orthogonal", record)))
    return 0


@cli.command()
@_model_options
@click.option("--state", default=None, help="maximizer, level:K or comma-separated coefficients")
@click.option("--mode", type=click.Choice(["full", "approximate", "both"]), default="both")
@click.pass_context
def crossover(ctx, source, output_dir, output_format, threads, state, mode) -> int:
    """Time where exponential decay gives way to the power law."""
    run = _load_run(ctx, source, output_dir, output_format, threads)
    psi = _resolve_state(run, state or "maximizer")
    report = asymptote_coeffs(run.model, AsymptoteMode.EXACT, run.tolerance)
    gamma = decay_rates(run.model)
    modes = [CrossoverMode.FULL, CrossoverMode.APPROXIMATE] if mode == "both" else [CrossoverMode(mode)]
    record: Dict[str, Any] = {"gamma": gamma}
    for m in modes:
        t_ep = crossover_time(run.model, psi, gamma, report, m)
        record[m.value] = {"t_ep": t_ep, "amplitude_sq": crossover_amplitude(report, psi, t_ep)}
    click.echo(str(_reporter(run).write_record("crossover", record)))
    return 0


@cli.command("hydrogen-table")
@click.option("--levels", default="1,10,50", help="Comma-separated level counts N")
@click.option("--check/--no-check", default=False, help="Compare with the published rows")
@click.option("--tolerance-mode", type=click.Choice(["strict", "loose"]), default="strict")
@click.option("--output-dir", type=click.Path(file_okay=False), default="./results")
@click.option("--format", "output_format", type=click.Choice(["csv", "json"]), default="csv")
@click.pass_context
def hydrogen_table(ctx, levels, check, tolerance_mode, output_dir, output_format) -> int:
    """Ratio R, lifetime t_N and crossover t_ep for the hydrogen np series."""
    try:
        n_list = [int(part) for part in levels.split(",") if part.strip()]
    except ValueError as exc:
        raise click.UsageError(f"--levels expects integers, got {levels!r}") from exc
    setup_logger(config={"logging": {"level": (ctx.obj or {}).get("log_level") or "INFO"}})
    _echo_header({"command": "hydrogen-table", "levels": n_list}, seed=DEFAULT_SEED)

    rows = reproduce_table(n_list)
    comparison = ResultComparator(mode=tolerance_mode).compare_table(rows) if check else None
    reporter = ReportGenerator(Path(output_dir), output_format)
    reporter.write_table(rows, comparison)
    click.echo(reporter.render_table(rows, comparison), nl=False)
    if comparison is not None and not comparison.matched:
        ctx.exit(2)
    return 0


@cli.command("oracle-check")
@_model_options
@click.option("--state", default=None, help="maximizer, level:K or comma-separated coefficients")
@click.option("--nodes", type=click.IntRange(min=10), default=2000, help="Continuum nodes M")
@click.option("--omega-max", type=float, default=None, help="Upper end of the discretized continuum")
@click.option("--lifetimes", type=float, default=5.0, help="Compare on [0, lifetimes / gamma_1]")
@click.option("--points", type=click.IntRange(min=2), default=200)
@click.option("--tolerance", type=float, default=None, help="Absolute tolerance on |dA|")
@click.option("--bound-states/--no-bound-states", default=False, help="Also run the bound-state scan")
@click.pass_context
def oracle_check(ctx, source, output_dir, output_format, threads, state, nodes, omega_max, lifetimes, points, tolerance, bound_states) -> int:
    """Compare the spectral method with exact propagation of a discretized model."""
    run = _load_run(ctx, source, output_dir, output_format, threads)
    psi = _resolve_state(run, state)
    spec = run.model
    omega_max = omega_max or 40.0 * float(spec.omegas.max())
    gamma_1 = float(decay_rates(spec)[0])
    if not gamma_1 > 0:
        raise ValidationError("level 1 does not decay; nothing to compare")

    hamiltonian = discretize(spec, nodes, omega_max)
    times = np.linspace(0.0, lifetimes / gamma_1, points)
    result = compare_with_spectral(
        hamiltonian, spec, psi, times, threads=run.threads, quadrature_tolerance=run.tolerance
    )

    comparator = ResultComparator()
    if tolerance is not None:
        comparator.tolerances["amplitude"] = ("abs", tolerance)
    verdict = comparator.compare_series(result.spectral, result.oracle)

    reporter = _reporter(run)
    reporter.write_columns("oracle_check", {"t": result.times, "spectral": result.spectral, "oracle": result.oracle})
    record: Dict[str, Any] = {
        "matched": verdict.matched,
        "max_abs_deviation": result.max_abs_deviation,
        "heisenberg_time": result.heisenberg_time,
        "nodes": nodes,
        "omega_max": omega_max,
        "differences": verdict.differences,
    }
    if bound_states:
        scan = no_bound_state_check(spec, threads=run.threads, tolerance=run.tolerance)
        record["bound_states"] = {
            "passed": scan.passed,
            "suspected": scan.suspected_bound_states,
            "completeness": scan.completeness,
            "messages": scan.messages,
        }
    click.echo(str(reporter.write_record("oracle_summary", record)))
    if not verdict.matched or (bound_states and not record["bound_states"]["passed"]):
        ctx.exit(2)
    return 0


# --- Entry points ----------------------------------------------------------

def dispatch(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand and return its exit code (0 ok, 1 validation, 2 numerical)"""
    try:
        rv = cli.main(args=argv, prog_name="friedrichs", standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        click.echo(SCHEMA_HINT, err=True)
        return 1
    except click.Abort:
        click.echo("Interrupted.", err=True)
        return 130
    return rv if isinstance(rv, int) else 0


def main(argv: Optional[List[str]] = None) -> int:
    return dispatch(argv if argv is not None else sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
