"""Parameter sweeps and Monte Carlo fading runs driving the solvers.

Randomness uses a counter-based generator (Philox) keyed by the config
seed: trial k draws from stream ``Philox(key=seed).jumped(k)``, so results
do not depend on evaluation order and any trial can be reproduced alone.
"""

from __future__ import annotations

import numpy as np

from ..binary_offload import solve_binary
from ..model import BINARY, MIXED, PARTIAL, InvalidParameterError, Solution
from ..partial_offload import solve_mixed, solve_partial
from .config import MonteCarloSpec, SweepSpec
from .csvio import SolutionRow, solution_row


def solve_one(scenario, scheme: str, mode: str, which_user_binary: int = 1) -> Solution:
    """Run the solver matching ``mode`` on one scenario."""
    if mode == BINARY:
        return solve_binary(scenario, scheme)
    if mode == PARTIAL:
        return solve_partial(scenario, scheme)
    if mode == MIXED:
        return solve_mixed(scenario, which_user_binary, scheme)
    raise InvalidParameterError(f"unknown mode {mode!r}")


def trial_rng(seed: int, k: int) -> np.random.Generator:
    """Independent generator for trial k of a seeded run."""
    return np.random.Generator(np.random.Philox(key=seed).jumped(k))


def sample_channel(distance: float, exponent: float, rng: np.random.Generator) -> float:
    """Draw a fading power gain at the given distance.

    Path loss d**-exponent scales a standard-exponential draw (Rayleigh
    amplitude with unit scale gives exponential power).
    """
    if distance <= 0.0:
        raise InvalidParameterError(f"distance must be positive, got {distance}")
    return distance**-exponent * rng.standard_exponential()


def run_sweep(spec: SweepSpec) -> list[SolutionRow]:
    """Solve every (value, mode, scheme) combination of a sweep.

    Rows come back in sweep order with the point index as scenario_id;
    infeasible points are kept with their verdict and reason.
    """
    rows = []
    for i, value in enumerate(spec.values):
        scenario = spec.template.build(**{spec.parameter: value})
        for mode in spec.modes:
            for scheme in spec.schemes:
                sol = solve_one(scenario, scheme, mode, spec.which_user_binary)
                rows.append(solution_row(str(i), value, sol))
    return rows


def _fractions(sol: Solution) -> tuple[float, float]:
    if sol.mode == BINARY:
        return 1.0, 1.0
    a = sol.allocation
    return a.gamma11, a.gamma21 + a.gamma23


def run_montecarlo(spec: MonteCarloSpec) -> list[dict]:
    """Average energy and offloaded fractions over fading trials.

    Aggregates are per (distance, mode, scheme).  With the feasibility
    filter on, a trial counts for a mode only when every scheme of that
    mode is feasible, so scheme means are comparable.  Zero surviving
    trials leaves nan means with feasible_count 0.  The same seed is used
    at every d1, so trial k sees the same fading draws at each distance.
    """
    out = []
    for d1 in spec.d1:
        out.extend(_montecarlo_at(spec, d1))
    return out


def _montecarlo_at(spec: MonteCarloSpec, d1: float) -> list[dict]:
    sums = {
        (mode, scheme): [0.0, 0.0, 0.0, 0]
        for mode in spec.modes
        for scheme in spec.schemes
    }
    for k in range(spec.trials):
        rng = trial_rng(spec.seed, k)
        h1 = sample_channel(d1, spec.exponent, rng)
        h2 = h1 if spec.equal_gains else sample_channel(spec.d2, spec.exponent, rng)
        scenario = spec.template.build(h1_sq=h1, h2_sq=h2)
        for mode in spec.modes:
            sols = [
                solve_one(scenario, scheme, mode, spec.which_user_binary)
                for scheme in spec.schemes
            ]
            if spec.feasibility_filter and not all(s.feasible for s in sols):
                continue
            for scheme, sol in zip(spec.schemes, sols):
                if not sol.feasible:
                    continue
                g1, g2 = _fractions(sol)
                acc = sums[mode, scheme]
                acc[0] += sol.total_energy_joules
                acc[1] += g1
                acc[2] += g2
                acc[3] += 1
    rows = []
    for mode in spec.modes:
        for scheme in spec.schemes:
            energy, g1, g2, n = sums[mode, scheme]
            rows.append(
                {
                    "mode": mode,
                    "scheme": scheme,
                    "d1": d1,
                    "d2": spec.d2,
                    "trials": spec.trials,
                    "feasible_count": n,
                    "mean_energy_joules": energy / n if n else float("nan"),
                    "mean_gamma_u1": g1 / n if n else float("nan"),
                    "mean_gamma_u2": g2 / n if n else float("nan"),
                }
            )
    return rows
