"""CLI entry point for the two-level laser toolkit."""

import logging
from enum import Enum
from pathlib import Path
from typing import Any, List, NoReturn, Optional

import typer
import yaml
from pydantic import ValidationError

app = typer.Typer(
    name="twolevellaser",
    help="Two-level laser toolkit - closed-form results, Langevin simulation and comparisons",
)

EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_COMPARISON = 3


class OutputFormat(str, Enum):
    """Available output formats."""
    csv = "csv"
    json = "json"


def _config_option() -> Any:
    return typer.Option(..., "-c", "--config", help="Path to YAML configuration file")


def _set_option() -> Any:
    return typer.Option(
        None, "--set", help="Override a configuration key, KEY=VALUE (repeatable)"
    )


def _output_option() -> Any:
    return typer.Option(None, "-o", "--output", help="Output file (default: stdout)")


def _format_option() -> Any:
    return typer.Option(None, "--format", help="Output format (csv or json)")


def _seed_option() -> Any:
    return typer.Option(None, "--seed", help="Override the base RNG seed")


@app.callback()
def main(
    verbose: bool = typer.Option(False, "-v", "--verbose", help="Log progress to stderr"),
) -> None:
    """Two-level laser toolkit."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )


def _fail(message: str, code: int) -> NoReturn:
    typer.echo(f"Error: {message}", err=True)
    raise typer.Exit(code)


def _parse_overrides(overrides: Optional[List[str]]) -> dict:
    parsed = {}
    for item in overrides or []:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            _fail(f"override must look like KEY=VALUE, got {item!r}", EXIT_CONFIG)
        try:
            parsed[key.strip()] = yaml.safe_load(value)
        except yaml.YAMLError as e:
            _fail(f"cannot parse override {item!r}: {e}", EXIT_CONFIG)
    return parsed


def load_config(
    config_file: Path,
    overrides: Optional[List[str]] = None,
    seed: Optional[int] = None,
):
    """Read, override and validate a configuration file. Exits with code 1 on error."""
    from .models import RunConfig

    if not config_file.exists():
        _fail(f"Configuration file not found: {config_file}", EXIT_CONFIG)

    try:
        with open(config_file) as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        _fail(f"cannot parse {config_file}: {e}", EXIT_CONFIG)

    if data is None:
        data = {}
    if not isinstance(data, dict):
        _fail(f"{config_file} must hold a mapping of configuration keys", EXIT_CONFIG)

    data.update(_parse_overrides(overrides))
    if seed is not None:
        data["seed"] = seed

    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        typer.echo("Validation error:", err=True)
        for error in e.errors():
            location = ".".join(str(part) for part in error["loc"]) or "<config>"
            typer.echo(f"  {location}: {error['msg']}", err=True)
        raise typer.Exit(EXIT_CONFIG)


def _exporter(output: Optional[Path], fmt: Optional[OutputFormat], default: str):
    from .export import Exporter

    return Exporter(output, fmt.value if fmt is not None else default)


@app.command()
def analytic(
    config: Path = _config_option(),
    overrides: Optional[List[str]] = _set_option(),
    output: Optional[Path] = _output_option(),
    fmt: Optional[OutputFormat] = _format_option(),
) -> None:
    """Evaluate every closed-form steady-state quantity."""
    from .theory import steady_state_report

    run = load_config(config, overrides)
    report = steady_state_report(run.to_params(), tol_rel=run.tol_rel, eps_wat=run.eps_wat)
    exporter = _exporter(output, fmt, "json")
    if exporter.fmt == "csv":
        exporter.export_table(
            ["quantity", "source", "value"],
            report.rows(),
            config=run.model_dump(),
            meta={"regime": report.regime.to_dict()},
        )
    else:
        exporter.export_document({"config": run.model_dump(), **report.to_dict()})


@app.command()
def spectrum(
    config: Path = _config_option(),
    overrides: Optional[List[str]] = _set_option(),
    output: Optional[Path] = _output_option(),
    fmt: Optional[OutputFormat] = _format_option(),
) -> None:
    """Sample the power spectrum on the configured frequency grid."""
    from .theory import spectrum_curve

    run = load_config(config, overrides)
    curve = spectrum_curve(run.to_params(), run.omega_grid())
    _exporter(output, fmt, "csv").export_table(
        ["omega_offset", "P"],
        curve.rows(),
        config=run.model_dump(),
        meta={"source": "Eq82", "negative_points": curve.negative_points},
    )


@app.command()
def bandfraction(
    config: Path = _config_option(),
    overrides: Optional[List[str]] = _set_option(),
    lambdas: Optional[List[float]] = typer.Option(
        None, "-l", "--lambda", help="Band half-width (repeatable, default: config lambdas)"
    ),
    output: Optional[Path] = _output_option(),
    fmt: Optional[OutputFormat] = _format_option(),
) -> None:
    """Tabulate the in-band photon fraction z(lambda) and photon number."""
    from .theory import band_fraction_z, integrate_spectrum, mean_photon_number

    run = load_config(config, overrides)
    values = list(lambdas) if lambdas else list(run.lambdas)
    negative = [lam for lam in values if lam < 0]
    if negative:
        _fail(f"lambda must be >= 0, got {negative}", EXIT_CONFIG)

    params = run.to_params()
    nbar = mean_photon_number(params)
    rows = []
    for lam in values:
        z = float(band_fraction_z(params, lam))
        z_quad = integrate_spectrum(params, -lam, lam) / nbar if nbar > 0 else float("nan")
        rows.append((lam, z, nbar * z, z_quad))

    _exporter(output, fmt, "csv").export_table(
        ["lambda", "z", "nbar_band", "z_quad"],
        rows,
        config=run.model_dump(),
        meta={"source": "Eq86"},
    )


def _run_simulation(
    config: Path,
    overrides: Optional[List[str]],
    seed: Optional[int],
    output: Optional[Path],
    fmt: Optional[OutputFormat],
    strict: bool,
    dump_trajectory: Optional[Path],
    dump_correlation: Optional[Path],
    dump_spectrum: Optional[Path],
) -> None:
    from .estimators import (
        InsufficientLagCoverage,
        build_comparison_report,
        default_taper_rate,
        estimate_correlation,
        estimate_spectrum,
        moment_plan,
    )
    from .export import Exporter
    from .simulation import simulate_moments, simulate_shard

    run = load_config(config, overrides, seed)
    params = run.to_params()
    try:
        sim = run.to_sim_config()
    except ValidationError as e:
        _fail(f"invalid simulation settings: {e}", EXIT_CONFIG)
    errors = sim.validate_for(params, stationary=True)
    if errors:
        _fail("; ".join(errors), EXIT_CONFIG)

    try:
        max_lag = run.resolved_max_lag(sim)
        plan = moment_plan(sim, params, max_lag, run.n_lags)
        moments = simulate_moments(params, sim, plan)
        report = build_comparison_report(run, moments)
    except ValueError as e:  # includes SampleBudgetExceeded
        _fail(str(e), EXIT_RUNTIME)

    _exporter(output, fmt, "json").export_document(report.to_dict())

    echo = run.model_dump()
    if dump_trajectory is not None:
        # trajectory 0 of the run, recomputed from its seed
        first = simulate_shard(params, sim, 0, 1)
        Exporter(dump_trajectory, "csv").export_table(
            ["t", "re_m", "im_m", "re_b", "im_b"], first.rows(0), config=echo
        )
    if dump_correlation is not None or dump_spectrum is not None:
        correlation = estimate_correlation(moments, sim.burn_in, max_lag, run.n_lags, params)
        if dump_correlation is not None:
            Exporter(dump_correlation, "csv").export_table(
                ["lag", "re", "im", "se"], correlation.rows(), config=echo
            )
        if dump_spectrum is not None:
            try:
                estimate = estimate_spectrum(
                    correlation, run.omega_grid(), default_taper_rate(params)
                )
            except InsufficientLagCoverage as e:
                _fail(str(e), EXIT_RUNTIME)
            Exporter(dump_spectrum, "csv").export_table(
                ["omega_offset", "P", "se"],
                estimate.rows(),
                config=echo,
                meta={"window_id": estimate.window_id, "resolution": estimate.resolution},
            )

    if strict and not report.passed:
        failed = [c.observable for c in report.comparisons if not c.passed]
        _fail(f"comparisons failed: {', '.join(failed)}", EXIT_COMPARISON)


@app.command()
def simulate(
    config: Path = _config_option(),
    overrides: Optional[List[str]] = _set_option(),
    seed: Optional[int] = _seed_option(),
    output: Optional[Path] = _output_option(),
    fmt: Optional[OutputFormat] = _format_option(),
    strict: bool = typer.Option(False, "--strict", help="Exit 3 if any comparison fails"),
    dump_trajectory: Optional[Path] = typer.Option(
        None, "--dump-trajectory", help="Write the first trajectory as CSV"
    ),
    dump_correlation: Optional[Path] = typer.Option(
        None, "--dump-correlation", help="Write the correlation estimate as CSV"
    ),
    dump_spectrum: Optional[Path] = typer.Option(
        None, "--dump-spectrum", help="Write the spectrum estimate on the omega grid as CSV"
    ),
) -> None:
    """Run a Langevin ensemble and compare every estimate with the closed forms."""
    _run_simulation(
        config, overrides, seed, output, fmt, strict,
        dump_trajectory, dump_correlation, dump_spectrum,
    )


@app.command()
def compare(
    config: Path = _config_option(),
    overrides: Optional[List[str]] = _set_option(),
    seed: Optional[int] = _seed_option(),
    output: Optional[Path] = _output_option(),
    fmt: Optional[OutputFormat] = _format_option(),
) -> None:
    """Like simulate --strict: exit 3 when any comparison fails."""
    _run_simulation(config, overrides, seed, output, fmt, True, None, None, None)


@app.command()
def populations(
    config: Path = _config_option(),
    overrides: Optional[List[str]] = _set_option(),
    seed: Optional[int] = _seed_option(),
    output: Optional[Path] = _output_option(),
    fmt: Optional[OutputFormat] = _format_option(),
    dump_ode: Optional[Path] = typer.Option(None, "--dump-ode", help="Write the ODE trajectory as CSV"),
    dump_jump: Optional[Path] = typer.Option(
        None, "--dump-jump", help="Write the jump-process trajectory as CSV"
    ),
) -> None:
    """Evolve the atomic populations and compare with the steady state."""
    from .estimators import compare as compare_row
    from .export import Exporter
    from .models import ComparisonReport, PopulationState
    from .models.state import population_rows
    from .simulation import (
        default_burn_in,
        jump_evolve,
        ode_evolve,
        ode_steady_state,
        single_atom_upper_probability,
        stationary_average,
    )
    from .theory import steady_populations

    run = load_config(config, overrides, seed)
    params = run.to_params()
    pop_t_end, pop_dt_max, jump_t_end = run.population_times()
    jump_seed = run.jump_seed if run.jump_seed is not None else run.seed

    try:
        ode = ode_evolve(
            params, PopulationState.from_upper(run.n_a0, params.n_atoms), pop_t_end, pop_dt_max
        )
        jump = jump_evolve(
            params,
            PopulationState.from_upper(float(round(run.n_a0)), params.n_atoms),
            jump_t_end,
            jump_seed,
        )
        burn_in = min(default_burn_in(params), jump_t_end / 2.0)
        average = stationary_average(jump, burn_in)
        # evolving from the closed-form steady state must not move it
        steady = steady_populations(params)
        held = ode_evolve(
            params, PopulationState.from_upper(steady.n_a, params.n_atoms), pop_t_end, pop_dt_max
        )
        single = params.model_copy(update={"n_atoms": 1})
        single_jump = jump_evolve(single, PopulationState.from_upper(0.0, 1), jump_t_end, jump_seed)
        single_average = stationary_average(single_jump, burn_in)
    except ValueError as e:
        _fail(str(e), EXIT_RUNTIME)

    fixed_point = ode_steady_state(params)
    end_n_a, end_n_b = float(held.n_a[-1]), float(held.n_b[-1])
    rows = [
        compare_row("n_a_ode_fixed_point", "Eq40", end_n_a, 0.0, steady.n_a,
                    floor=1e-12 * max(steady.n_a, 1.0)),
    ]
    if params.pump_rate > 0 and end_n_a > 0:
        ratio = params.gamma_c / params.pump_rate
        rows.append(
            compare_row("n_b_over_n_a_ode", "Eq41", end_n_b / end_n_a, 0.0, ratio,
                        floor=1e-12 * ratio)
        )
    rows += [
        compare_row("n_a_jump_average", "Eq40", average.mean, average.se, steady.n_a),
        compare_row("n_b_jump_average", "Eq41", params.n_atoms - average.mean, average.se,
                    steady.n_b),
        compare_row("single_atom_upper_fraction", "Eq40", single_average.mean, single_average.se,
                    single_atom_upper_probability(params)),
    ]
    report = ComparisonReport(
        config=run.model_dump(),
        comparisons=rows,
        blocks={
            "steady_state": {"n_a": steady.n_a, "n_b": steady.n_b, "ode_fixed_point": fixed_point.n_a},
            "jump": {
                "events": jump.n_events,
                "burn_in": burn_in,
                "n_batches": average.n_batches,
            },
            "single_atom": {
                "events": single_jump.n_events,
                "upper_probability": single_atom_upper_probability(params),
            },
        },
    )
    _exporter(output, fmt, "json").export_document(report.to_dict())

    echo = run.model_dump()
    if dump_ode is not None:
        Exporter(dump_ode, "csv").export_table(["t", "n_a", "n_b"], population_rows(ode), config=echo)
    if dump_jump is not None:
        Exporter(dump_jump, "csv").export_table(["t", "n_a", "n_b"], population_rows(jump), config=echo)


@app.command()
def validate(
    config: Path = _config_option(),
    overrides: Optional[List[str]] = _set_option(),
) -> None:
    """Validate a configuration file and echo the effective configuration."""
    run = load_config(config, overrides)
    params = run.to_params()
    typer.echo(f"Configuration valid: {config}")
    typer.echo(f"  gamma_c: {params.gamma_c:.6g}")
    typer.echo(f"  eta: {params.eta:.6g}")
    try:
        sim = run.to_sim_config()
    except ValidationError as e:
        _fail(f"invalid simulation settings: {e}", EXIT_CONFIG)
    for error in sim.validate_for(params, stationary=True):
        typer.echo(f"  warning: {error}", err=True)
    typer.echo(f"  dt: {sim.dt:.6g}  t_end: {sim.t_end:.6g}  burn_in: {sim.burn_in:.6g}")
    typer.echo(yaml.safe_dump(run.model_dump(), sort_keys=False), nl=False)


if __name__ == "__main__":
    app()
