"""Energy-minimal resource allocation for two-user computational offloading
over a multiple-access channel.

The package solves for the transmission rates, powers and slot durations
that let two latency-constrained users offload work to an access point with
the least total transmit (plus, for divisible tasks, local CPU) energy.
Four uplink schemes are covered: the full multiple-access region, TDMA,
sequential decoding without time sharing, and independent decoding.
"""

from .binary_offload import (
    BinaryDecision,
    decide_binary,
    feasibility_slack,
    solve_binary,
    solve_full_ma,
    solve_id,
    solve_sdwts,
    solve_single_user,
    solve_tdma,
)
from .model import (
    BINARY,
    FULL_MA,
    ID,
    MIXED,
    MODES,
    PARTIAL,
    SCHEMES,
    SDWTS,
    TDMA,
    Allocation,
    InfeasibleLatencyError,
    InvalidParameterError,
    LocalComputeModel,
    RadioLink,
    Scenario,
    Solution,
    TaskSpec,
    build_scenario,
    check_solution,
    effective_gain,
    local_energy_dvs,
    normalized_latency,
    region_member,
)
from .oracle import GridSpec, OracleResult, oracle_solve
from .partial_offload import (
    solve_mixed,
    solve_partial,
    solve_partial_full_ma,
    solve_partial_single_user,
    solve_partial_tdma,
)

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "BINARY",
    "BinaryDecision",
    "FULL_MA",
    "GridSpec",
    "ID",
    "InfeasibleLatencyError",
    "InvalidParameterError",
    "LocalComputeModel",
    "MIXED",
    "MODES",
    "OracleResult",
    "PARTIAL",
    "RadioLink",
    "SCHEMES",
    "SDWTS",
    "Scenario",
    "Solution",
    "TDMA",
    "TaskSpec",
    "build_scenario",
    "check_solution",
    "decide_binary",
    "effective_gain",
    "feasibility_slack",
    "local_energy_dvs",
    "normalized_latency",
    "oracle_solve",
    "region_member",
    "solve_binary",
    "solve_full_ma",
    "solve_id",
    "solve_mixed",
    "solve_partial",
    "solve_partial_full_ma",
    "solve_partial_single_user",
    "solve_partial_tdma",
    "solve_sdwts",
    "solve_single_user",
    "solve_tdma",
]
