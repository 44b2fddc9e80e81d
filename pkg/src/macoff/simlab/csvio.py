"""CSV tables for solver output.

Solution tables carry one row per solved (scenario, scheme, mode); Monte
Carlo aggregates get their own shorter schema.  Floats are printed with
repr-exact precision (%.17g) so a written table reads back bit-identical.
Energies, slot lengths and rates are in the solver's normalized units
(watt-channel-uses, channel uses, bits per use) except the explicitly
joule-valued columns; powers are watts.  Infeasible rows keep their verdict
and reason and carry nan in every numeric column.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, fields

from ..model import Allocation, Scenario, Solution, check_solution

SOLUTION_COLUMNS = (
    "scenario_id",
    "sweep_value",
    "scheme",
    "mode",
    "feasible",
    "energy_total_norm",
    "energy_total_joules",
    "energy_u1",
    "energy_u2",
    "tau1",
    "tau2",
    "tau3",
    "R11",
    "R21",
    "R12",
    "R23",
    "P11",
    "P21",
    "P12",
    "P23",
    "gamma11",
    "gamma21",
    "gamma23",
    "case_trace",
)

AGGREGATE_COLUMNS = (
    "mode",
    "scheme",
    "d1",
    "d2",
    "trials",
    "feasible_count",
    "mean_energy_joules",
    "mean_gamma_u1",
    "mean_gamma_u2",
)

NAN = float("nan")


@dataclass(frozen=True)
class SolutionRow:
    scenario_id: str
    sweep_value: float
    scheme: str
    mode: str
    feasible: bool
    energy_total_norm: float
    energy_total_joules: float
    energy_u1: float
    energy_u2: float
    tau1: float
    tau2: float
    tau3: float
    R11: float
    R21: float
    R12: float
    R23: float
    P11: float
    P21: float
    P12: float
    P23: float
    gamma11: float
    gamma21: float
    gamma23: float
    case_trace: str


def solution_row(scenario_id: str, sweep_value: float, sol: Solution) -> SolutionRow:
    # commas would break the single-token case_trace column
    trace = sol.case_trace.replace(",", ";")
    if not sol.feasible:
        return SolutionRow(
            scenario_id, sweep_value, sol.scheme, sol.mode, False,
            NAN, NAN, NAN, NAN, NAN, NAN, NAN, NAN, NAN, NAN, NAN,
            NAN, NAN, NAN, NAN, NAN, NAN, NAN, trace,
        )
    a = sol.allocation
    return SolutionRow(
        scenario_id=scenario_id,
        sweep_value=sweep_value,
        scheme=sol.scheme,
        mode=sol.mode,
        feasible=True,
        energy_total_norm=sol.total_energy,
        energy_total_joules=sol.total_energy_joules,
        energy_u1=sol.energy1,
        energy_u2=sol.energy2,
        tau1=a.tau[0],
        tau2=a.tau[1],
        tau3=a.tau[2],
        R11=a.R11,
        R21=a.R21,
        R12=a.R12,
        R23=a.R23,
        P11=a.P11,
        P21=a.P21,
        P12=a.P12,
        P23=a.P23,
        gamma11=a.gamma11,
        gamma21=a.gamma21,
        gamma23=a.gamma23,
        case_trace=trace,
    )


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_solutions(rows, target) -> None:
    """Write solution rows as CSV to a path or an open text stream."""
    if hasattr(target, "write"):
        _write_table(rows, target, SOLUTION_COLUMNS, _row_values)
        return
    with open(target, "w", encoding="utf-8", newline="") as fh:
        _write_table(rows, fh, SOLUTION_COLUMNS, _row_values)


def _row_values(row: SolutionRow):
    return [_fmt(getattr(row, f.name)) for f in fields(SolutionRow)]


def _write_table(rows, fh, columns, values_of) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(values_of(row))


def read_solutions(path) -> list[SolutionRow]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != SOLUTION_COLUMNS:
            raise ValueError(f"{path}: not a solution table (bad header)")
        out = []
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != len(SOLUTION_COLUMNS):
                raise ValueError(f"{path}:{lineno}: expected {len(SOLUTION_COLUMNS)} columns")
            vals: list = [rec[0]]
            vals.append(float(rec[1]))
            vals.extend(rec[2:4])
            if rec[4] not in ("0", "1"):
                raise ValueError(f"{path}:{lineno}: feasible must be 0 or 1, got {rec[4]!r}")
            vals.append(rec[4] == "1")
            vals.extend(float(v) for v in rec[5:23])
            vals.append(rec[23])
            out.append(SolutionRow(*vals))
        return out


def write_aggregates(rows, target) -> None:
    """Write Monte Carlo aggregate dicts as CSV to a path or stream."""
    values_of = lambda r: [_fmt(r[c]) for c in AGGREGATE_COLUMNS]
    if hasattr(target, "write"):
        _write_table(rows, target, AGGREGATE_COLUMNS, values_of)
        return
    with open(target, "w", encoding="utf-8", newline="") as fh:
        _write_table(rows, fh, AGGREGATE_COLUMNS, values_of)


def _rebuild(row: SolutionRow, scenario: Scenario) -> Solution:
    return Solution(
        scheme=row.scheme,
        mode=row.mode,
        feasible=True,
        symbol_interval=scenario.symbol_interval,
        allocation=Allocation(
            tau=(row.tau1, row.tau2, row.tau3),
            R11=row.R11,
            R21=row.R21,
            R12=row.R12,
            R23=row.R23,
            P11=row.P11,
            P21=row.P21,
            P12=row.P12,
            P23=row.P23,
            gamma11=row.gamma11,
            gamma21=row.gamma21,
            gamma23=row.gamma23,
        ),
        energy1=row.energy_u1,
        energy2=row.energy_u2,
        case_trace=row.case_trace,
    )


def validate_solutions(rows, scenario_of_row, tol: float = 1e-6) -> list[str]:
    """Re-check emitted rows against their scenarios.

    ``scenario_of_row`` maps a row back to its Scenario (for sweep tables,
    by rebuilding from the swept value).  Returns a list of violation
    messages, one per failed check; empty means the table is consistent.
    """
    problems = []
    for i, row in enumerate(rows):
        where = f"row {i} ({row.scenario_id}/{row.scheme}/{row.mode})"
        if not row.feasible:
            continue
        try:
            scenario = scenario_of_row(row)
        except Exception as exc:
            problems.append(f"{where}: cannot rebuild scenario: {exc}")
            continue
        total = row.energy_u1 + row.energy_u2
        if not math.isclose(total, row.energy_total_norm, rel_tol=1e-9, abs_tol=1e-12):
            problems.append(f"{where}: energy_u1+energy_u2 != energy_total_norm")
        joules = row.energy_total_norm * scenario.symbol_interval
        if not math.isclose(joules, row.energy_total_joules, rel_tol=1e-9, abs_tol=0.0):
            problems.append(f"{where}: energy_total_joules != energy_total_norm * Ts")
        for msg in check_solution(scenario, _rebuild(row, scenario), tol):
            problems.append(f"{where}: {msg}")
    return problems
