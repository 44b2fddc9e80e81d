"""Experiment harness: channel sampling, sweeps, Monte Carlo runs and the
config/CSV formats used by the command line interface."""

from .config import (
    ConfigError,
    ConfigWarning,
    MonteCarloSpec,
    ScenarioTemplate,
    SweepSpec,
    bundled_config_names,
    load_config,
)
from .csvio import (
    AGGREGATE_COLUMNS,
    SOLUTION_COLUMNS,
    SolutionRow,
    read_solutions,
    solution_row,
    validate_solutions,
    write_aggregates,
    write_solutions,
)
from .experiments import (
    run_montecarlo,
    run_sweep,
    sample_channel,
    solve_one,
    trial_rng,
)

__all__ = [
    "AGGREGATE_COLUMNS",
    "ConfigError",
    "ConfigWarning",
    "MonteCarloSpec",
    "SOLUTION_COLUMNS",
    "ScenarioTemplate",
    "SolutionRow",
    "SweepSpec",
    "bundled_config_names",
    "load_config",
    "read_solutions",
    "run_montecarlo",
    "run_sweep",
    "sample_channel",
    "solution_row",
    "solve_one",
    "trial_rng",
    "validate_solutions",
    "write_aggregates",
    "write_solutions",
]
