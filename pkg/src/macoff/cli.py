"""Command line interface.

Configs are YAML files (see macoff.simlab.config); the bundled experiment
configs can be named directly, e.g. ``--config fig4``.  Infeasible verdicts
are results, not errors: the exit code is 0 unless something actually
fails (bad config, unreadable CSV, oracle disagreement).
"""

from __future__ import annotations

import dataclasses
import json
import math
import sys

import click

from .model import (
    BINARY,
    MODES,
    SCHEMES,
    InfeasibleLatencyError,
    InvalidParameterError,
    Scenario,
)
from .oracle import GridSpec, oracle_solve
from .scalar_opt import DescentNumericalError, EmptyIntervalError
from .simlab import csvio, experiments
from .simlab.config import ConfigError, MonteCarloSpec, SweepSpec, load_config

_ERRORS = (
    ConfigError,
    InvalidParameterError,
    InfeasibleLatencyError,
    DescentNumericalError,
    EmptyIntervalError,
    OSError,
    ValueError,
)


def _load(path):
    try:
        return load_config(path)
    except _ERRORS as exc:
        raise click.ClickException(str(exc))


def _scenario_from(loaded, source: str) -> Scenario:
    if isinstance(loaded, Scenario):
        return loaded
    if isinstance(loaded, SweepSpec):
        try:
            return loaded.template.build()
        except _ERRORS as exc:
            raise click.ClickException(
                f"{source}: cannot fix a single scenario from this sweep config: {exc}"
            )
    raise click.ClickException(
        f"{source}: montecarlo configs have no fixed channel; use the montecarlo command"
    )


def _fmt(x) -> str:
    if x is None:
        return "-"
    return format(x, ".6g")


def _echo_solution(sol, scenario: Scenario) -> None:
    click.echo(f"scheme={sol.scheme} mode={sol.mode} feasible={'yes' if sol.feasible else 'no'}")
    if scenario.permutation != (1, 2):
        click.echo("note: users reordered by latency; user 1 below is input user 2")
    if not sol.feasible:
        click.echo(f"reason: {sol.case_trace}")
        return
    a = sol.allocation
    click.echo(
        f"energy: total {_fmt(sol.total_energy_joules)} J"
        f" ({_fmt(sol.total_energy)} W*uses);"
        f" user1 {_fmt(sol.energy1_joules)} J, user2 {_fmt(sol.energy2_joules)} J"
    )
    click.echo(f"slots (uses): tau1={_fmt(a.tau[0])} tau2={_fmt(a.tau[1])} tau3={_fmt(a.tau[2])}")
    click.echo(
        f"rates (bits/use): R11={_fmt(a.R11)} R21={_fmt(a.R21)}"
        f" R12={_fmt(a.R12)} R23={_fmt(a.R23)}"
    )
    click.echo(
        f"powers (W): P11={_fmt(a.P11)} P21={_fmt(a.P21)} P12={_fmt(a.P12)} P23={_fmt(a.P23)}"
    )
    click.echo(
        f"fractions: gamma11={_fmt(a.gamma11)} gamma21={_fmt(a.gamma21)}"
        f" gamma23={_fmt(a.gamma23)}"
    )
    click.echo(f"case: {sol.case_trace}")


@click.group()
@click.version_option(package_name="macoff")
def main() -> None:
    """Energy-minimal two-user multiple-access offloading."""


@main.command()
@click.option("--config", "config_path", required=True, help="Config file or bundled name.")
@click.option("--scheme", type=click.Choice(SCHEMES), default="fullma", show_default=True)
@click.option("--mode", type=click.Choice(MODES), default=None, help="Defaults to the config's mode.")
@click.option("--binary-user", type=click.IntRange(1, 2), default=None, help="Mixed mode: which user is all-or-nothing.")
@click.option("--json", "as_json", is_flag=True, help="Machine output mirroring the CSV columns.")
@click.option("--csv", "as_csv", is_flag=True, help="One-row CSV solution table on stdout.")
def solve(config_path, scheme, mode, binary_user, as_json, as_csv):
    """Solve a single scenario for one scheme and mode."""
    if as_json and as_csv:
        raise click.ClickException("choose one of --json and --csv")
    loaded = _load(config_path)
    scenario = _scenario_from(loaded, config_path)
    if mode is None:
        mode = loaded.modes[0] if isinstance(loaded, SweepSpec) else BINARY
    if binary_user is None:
        binary_user = loaded.which_user_binary if isinstance(loaded, SweepSpec) else 1
    try:
        sol = experiments.solve_one(scenario, scheme, mode, binary_user)
    except _ERRORS as exc:
        raise click.ClickException(str(exc))
    row = csvio.solution_row("0", math.nan, sol)
    if as_json:
        payload = dataclasses.asdict(row)
        click.echo(json.dumps(payload, allow_nan=True))
    elif as_csv:
        csvio.write_solutions([row], sys.stdout)
    else:
        _echo_solution(sol, scenario)


@main.command()
@click.option("--config", "config_path", required=True, help="Sweep config file or bundled name.")
@click.option("--output", type=click.Path(dir_okay=False, writable=True), default=None, help="Write the CSV here instead of stdout.")
def sweep(config_path, output):
    """Run a parameter sweep and emit a solution table."""
    spec = _load(config_path)
    if not isinstance(spec, SweepSpec):
        raise click.ClickException(f"{config_path}: not a sweep config")
    try:
        rows = experiments.run_sweep(spec)
    except _ERRORS as exc:
        raise click.ClickException(str(exc))
    if output is None:
        csvio.write_solutions(rows, sys.stdout)
        return
    csvio.write_solutions(rows, output)
    feasible = sum(1 for r in rows if r.feasible)
    click.echo(
        f"wrote {len(rows)} rows ({feasible} feasible) over "
        f"{len(spec.values)} {spec.parameter} values to {output}"
    )


@main.command()
@click.option("--config", "config_path", required=True, help="Monte Carlo config file or bundled name.")
@click.option("--trials", type=click.IntRange(min=1), default=None, help="Override the config's trial count.")
@click.option("--seed", type=int, default=None, help="Override the config's seed.")
@click.option("--output", type=click.Path(dir_okay=False, writable=True), default=None, help="Write the aggregate CSV here.")
def montecarlo(config_path, trials, seed, output):
    """Average fading trials into per-scheme energies and fractions."""
    spec = _load(config_path)
    if not isinstance(spec, MonteCarloSpec):
        raise click.ClickException(f"{config_path}: not a montecarlo config")
    try:
        if trials is not None:
            spec = dataclasses.replace(spec, trials=trials)
        if seed is not None:
            spec = dataclasses.replace(spec, seed=seed)
        rows = experiments.run_montecarlo(spec)
    except _ERRORS as exc:
        raise click.ClickException(str(exc))
    for r in rows:
        click.echo(
            f"d1={r['d1']:g} {r['mode']}/{r['scheme']}: "
            f"{r['feasible_count']}/{r['trials']} feasible, "
            f"mean energy {_fmt(r['mean_energy_joules'])} J, "
            f"mean fractions {_fmt(r['mean_gamma_u1'])}/{_fmt(r['mean_gamma_u2'])}"
        )
    if output is not None:
        csvio.write_aggregates(rows, output)
        click.echo(f"wrote {len(rows)} aggregate rows to {output}")


@main.command("oracle-check")
@click.option("--config", "config_path", required=True, help="Config file or bundled name.")
@click.option("--scheme", type=click.Choice(SCHEMES), default="fullma", show_default=True)
@click.option("--mode", type=click.Choice(MODES), default=BINARY, show_default=True)
@click.option("--binary-user", type=click.IntRange(1, 2), default=1, show_default=True)
@click.option("--grid", type=click.IntRange(min=16), default=None, help="Grid points per axis.")
@click.option("--tolerance", type=float, default=1e-3, show_default=True, help="Relative energy tolerance.")
def oracle_check(config_path, scheme, mode, binary_user, grid, tolerance):
    """Compare the solver against the brute-force oracle on one scenario."""
    loaded = _load(config_path)
    scenario = _scenario_from(loaded, config_path)
    spec = None
    if grid is not None:
        spec = GridSpec(points_low_dim=grid, points_high_dim=min(grid, 120))
    try:
        sol = experiments.solve_one(scenario, scheme, mode, binary_user)
        which = binary_user if mode == "mixed" else None
        res = oracle_solve(scenario, scheme, mode=mode, which_user_binary=which, spec=spec)
    except _ERRORS as exc:
        raise click.ClickException(str(exc))
    click.echo(f"solver: feasible={'yes' if sol.feasible else 'no'} energy={_fmt(sol.total_energy)}")
    click.echo(f"oracle: feasible={'yes' if res.feasible else 'no'} energy={_fmt(res.energy)}")
    if sol.feasible != res.feasible:
        raise click.ClickException("feasibility verdicts disagree")
    if not sol.feasible:
        click.echo("agreed: infeasible")
        return
    rel = abs(sol.total_energy - res.energy) / max(abs(res.energy), 1e-300)
    # the solver may undercut the coarse grid by more than the tolerance;
    # that only counts against it beyond the oracle's own slack estimate
    beats = res.energy < sol.total_energy - res.info["slack"]
    click.echo(f"relative difference: {rel:.3e} (oracle slack {res.info['slack']:.3e})")
    if rel > tolerance and beats:
        raise click.ClickException("oracle found a better point than the solver")
    click.echo("agreed: within tolerance")


@main.command()
@click.argument("csvpath", type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", required=True, help="Config that produced the table.")
def validate(csvpath, config_path):
    """Re-check a solution CSV: bit accounting, budgets, latencies, regions."""
    loaded = _load(config_path)
    if isinstance(loaded, MonteCarloSpec):
        raise click.ClickException(
            "montecarlo outputs are aggregates; validate works on solve/sweep tables"
        )
    try:
        rows = csvio.read_solutions(csvpath)
    except (OSError, ValueError) as exc:
        raise click.ClickException(str(exc))

    if isinstance(loaded, Scenario):
        scenario_of_row = lambda row: loaded
    else:
        scenario_of_row = lambda row: loaded.template.build(
            **{loaded.parameter: row.sweep_value}
        )
    problems = csvio.validate_solutions(rows, scenario_of_row)
    for p in problems:
        click.echo(p, err=True)
    if problems:
        raise click.ClickException(f"{len(problems)} problem(s) in {len(rows)} rows")
    click.echo(f"{len(rows)} rows OK")


if __name__ == "__main__":
    main()
