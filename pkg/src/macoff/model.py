"""Domain model for two-user computational offloading over a multiple-access channel.

Two mobile users share an uplink to an edge server.  Each user k has a task of
``bits`` input bits that must be done within ``latency`` seconds.  A task is
either offloaded completely (binary mode), split between the handset and the
server (partial mode), or one user is binary and the other partial (mixed).

Transmission happens over at most three sequential slots: a joint slot where
both users transmit, a slot where only user 1 transmits, and a slot where only
user 2 transmits.  Rates are in bits per channel use, powers in watts, slot
durations in channel uses, and one channel use lasts ``symbol_interval``
seconds.  Energies are kept in watt-channel-uses; multiply by the symbol
interval for joules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

LN2 = math.log(2.0)

FULL_MA = "fullma"
TDMA = "tdma"
SDWTS = "sdwts"
ID = "id"
SCHEMES = (FULL_MA, TDMA, SDWTS, ID)

BINARY = "binary"
PARTIAL = "partial"
MIXED = "mixed"
MODES = (BINARY, PARTIAL, MIXED)


class InvalidParameterError(ValueError):
    """A physical parameter is outside its admissible range."""


class InfeasibleLatencyError(ValueError):
    """No transmission time remains once fixed latency components are removed."""


def pow2(x: float) -> float:
    """2**x that saturates to +inf instead of raising OverflowError."""
    if x > 1024.0:
        return math.inf
    return 2.0 ** x


def log2_1p(x: float) -> float:
    """log2(1 + x), accurate for small x."""
    return math.log1p(x) / LN2


def effective_gain(gain: float, noise: float) -> float:
    """Channel power gain divided by noise power, |h|^2 / sigma^2.

    The product of effective gain and transmit power is the receive SNR, so
    log2(1 + effective_gain * P) is the single-user rate cap.
    """
    if gain <= 0.0 or not math.isfinite(gain):
        raise InvalidParameterError(f"channel power gain must be positive, got {gain}")
    if noise <= 0.0 or not math.isfinite(noise):
        raise InvalidParameterError(f"noise power must be positive, got {noise}")
    return gain / noise


@dataclass(frozen=True)
class LocalComputeModel:
    """Local execution model for divisible tasks.

    Running ``b`` bits locally with the whole deadline ``L`` available costs
    ``chip_constant * b**3 / L**2`` joules under voltage scaling.
    ``cloud_time_per_bit`` is the server-side execution time per offloaded bit.
    """

    chip_constant: float
    cloud_time_per_bit: float = 0.0

    def __post_init__(self) -> None:
        if self.chip_constant <= 0.0 or not math.isfinite(self.chip_constant):
            raise InvalidParameterError(
                f"chip_constant must be positive, got {self.chip_constant}"
            )
        if self.cloud_time_per_bit < 0.0:
            raise InvalidParameterError(
                f"cloud_time_per_bit must be nonnegative, got {self.cloud_time_per_bit}"
            )


@dataclass(frozen=True)
class TaskSpec:
    """One user's task.

    ``exec_time`` is the fixed remote execution time and ``downlink_time`` the
    result download time; both are subtracted from the deadline in binary mode.
    ``local_energy`` is the cost of running the whole task locally, in
    watt-channel-uses; ``None`` means local execution cannot meet the deadline.
    ``local_model`` is required for partial offloading.
    """

    bits: float
    latency: float
    exec_time: float = 0.0
    downlink_time: float = 0.0
    local_energy: float | None = None
    local_model: LocalComputeModel | None = None

    def __post_init__(self) -> None:
        if self.bits <= 0.0 or not math.isfinite(self.bits):
            raise InvalidParameterError(f"bits must be positive, got {self.bits}")
        if self.latency <= 0.0 or not math.isfinite(self.latency):
            raise InvalidParameterError(f"latency must be positive, got {self.latency}")
        if self.exec_time < 0.0:
            raise InvalidParameterError(f"exec_time must be nonnegative, got {self.exec_time}")
        if self.downlink_time < 0.0:
            raise InvalidParameterError(
                f"downlink_time must be nonnegative, got {self.downlink_time}"
            )
        if self.local_energy is not None and self.local_energy < 0.0:
            raise InvalidParameterError(
                f"local_energy must be nonnegative, got {self.local_energy}"
            )


@dataclass(frozen=True)
class RadioLink:
    """Uplink channel of one user: power gain |h|^2 and transmit power budget in watts."""

    gain: float
    power_budget: float

    def __post_init__(self) -> None:
        if self.gain <= 0.0 or not math.isfinite(self.gain):
            raise InvalidParameterError(f"gain must be positive, got {self.gain}")
        if self.power_budget <= 0.0 or not math.isfinite(self.power_budget):
            raise InvalidParameterError(
                f"power_budget must be positive, got {self.power_budget}"
            )


def normalized_latency(task: TaskSpec, symbol_interval: float, mode: str) -> float:
    """Transmission time budget left after fixed latency components.

    Binary mode returns channel uses: (L - exec_time - downlink_time) / Ts.
    Partial mode returns seconds: L - downlink_time (server execution scales
    with the offloaded fraction and is accounted inside the solvers).
    """
    if symbol_interval <= 0.0:
        raise InvalidParameterError(
            f"symbol_interval must be positive, got {symbol_interval}"
        )
    if mode == BINARY:
        remaining = task.latency - task.exec_time - task.downlink_time
        if remaining <= 0.0:
            raise InfeasibleLatencyError(
                "no uplink time remains: latency %g <= exec %g + downlink %g"
                % (task.latency, task.exec_time, task.downlink_time)
            )
        return remaining / symbol_interval
    if mode == PARTIAL:
        remaining = task.latency - task.downlink_time
        if remaining <= 0.0:
            raise InfeasibleLatencyError(
                "no uplink time remains: latency %g <= downlink %g"
                % (task.latency, task.downlink_time)
            )
        return remaining
    raise InvalidParameterError(f"unknown mode {mode!r}")


def local_energy_dvs(model: LocalComputeModel, bits: float, latency: float) -> float:
    """Voltage-scaled local execution energy M * bits^3 / latency^2 in joules.

    Zero bits cost nothing; a nonpositive latency with positive bits is
    rejected because the deadline cannot be met at any clock speed.
    """
    if bits < 0.0:
        raise InvalidParameterError(f"bits must be nonnegative, got {bits}")
    if bits == 0.0:
        return 0.0
    if latency <= 0.0:
        raise InvalidParameterError(
            f"latency must be positive for nonzero local bits, got {latency}"
        )
    return model.chip_constant * bits**3 / latency**2


@dataclass(frozen=True)
class Scenario:
    """A fully specified two-user instance, users ordered so user 1 has the
    smaller latency.  ``permutation`` maps (user1, user2) back to the original
    input positions."""

    user1: TaskSpec
    user2: TaskSpec
    link1: RadioLink
    link2: RadioLink
    noise: float
    symbol_interval: float
    permutation: tuple[int, int] = (1, 2)

    def __post_init__(self) -> None:
        if self.noise <= 0.0 or not math.isfinite(self.noise):
            raise InvalidParameterError(f"noise must be positive, got {self.noise}")
        if self.symbol_interval <= 0.0 or not math.isfinite(self.symbol_interval):
            raise InvalidParameterError(
                f"symbol_interval must be positive, got {self.symbol_interval}"
            )
        if self.user1.latency > self.user2.latency:
            raise InvalidParameterError(
                "user1 must have the smaller latency; use build_scenario to reorder"
            )
        if sorted(self.permutation) != [1, 2]:
            raise InvalidParameterError(f"permutation must contain 1 and 2, got {self.permutation}")

    @property
    def alpha1(self) -> float:
        return effective_gain(self.link1.gain, self.noise)

    @property
    def alpha2(self) -> float:
        return effective_gain(self.link2.gain, self.noise)

    def latency_budget(self, user: int, mode: str) -> float:
        task = self.user1 if user == 1 else self.user2
        return normalized_latency(task, self.symbol_interval, mode)


def build_scenario(
    user_a: TaskSpec,
    user_b: TaskSpec,
    link_a: RadioLink,
    link_b: RadioLink,
    noise: float,
    symbol_interval: float,
) -> Scenario:
    """Build a Scenario, swapping the users so the smaller latency comes first.

    The applied permutation is recorded so per-user results can be mapped back
    to the caller's ordering.
    """
    if user_a.latency <= user_b.latency:
        return Scenario(user_a, user_b, link_a, link_b, noise, symbol_interval, (1, 2))
    return Scenario(user_b, user_a, link_b, link_a, noise, symbol_interval, (2, 1))


def original_order(pair: tuple, permutation: tuple[int, int]) -> tuple:
    """Undo the ordering applied by build_scenario on a per-user pair."""
    if permutation == (1, 2):
        return pair
    return (pair[1], pair[0])


def region_member(
    scheme: str,
    R11: float,
    R21: float,
    P11: float,
    P21: float,
    alpha1: float,
    alpha2: float,
    tol: float = 1e-9,
) -> bool:
    """Whether the joint-slot rate pair is decodable at the given powers.

    Each scheme has its own achievable region for the slot where both users
    transmit; every inequality is checked with additive slack ``tol``.
    """
    for name, value in (("R11", R11), ("R21", R21), ("P11", P11), ("P21", P21)):
        if value < 0.0 or not math.isfinite(value):
            raise InvalidParameterError(f"{name} must be finite and nonnegative, got {value}")
    s1 = alpha1 * P11
    s2 = alpha2 * P21
    if scheme == FULL_MA:
        return (
            R11 <= log2_1p(s1) + tol
            and R21 <= log2_1p(s2) + tol
            and R11 + R21 <= log2_1p(s1 + s2) + tol
        )
    if scheme == SDWTS:
        # one user is decoded first and sees the other as noise
        order1 = R11 <= log2_1p(s1) + tol and R21 <= log2_1p(s2 / (1.0 + s1)) + tol
        order2 = R21 <= log2_1p(s2) + tol and R11 <= log2_1p(s1 / (1.0 + s2)) + tol
        return order1 or order2
    if scheme == ID:
        # both users decoded against the other's interference
        return (
            R11 <= log2_1p(s1 / (1.0 + s2)) + tol
            and R21 <= log2_1p(s2 / (1.0 + s1)) + tol
        )
    if scheme == TDMA:
        if R11 > tol and R21 > tol:
            return False
        return R11 <= log2_1p(s1) + tol and R21 <= log2_1p(s2) + tol
    raise InvalidParameterError(f"unknown scheme {scheme!r}")


@dataclass(frozen=True)
class Allocation:
    """Rates, powers and slot durations of one solution.

    ``tau`` holds the three slot durations in channel uses: joint slot,
    user-1-only slot, user-2-only slot.  R11/R21 and P11/P21 belong to the
    joint slot, R12/P12 to user 1's solo slot and R23/P23 to user 2's solo
    slot.  ``gamma11`` is the fraction of user 1's bits carried by its first
    active slot, ``gamma21``/``gamma23`` the fractions of user 2's bits in the
    joint and solo slots.
    """

    tau: tuple[float, float, float]
    R11: float = 0.0
    R21: float = 0.0
    R12: float = 0.0
    R23: float = 0.0
    P11: float = 0.0
    P21: float = 0.0
    P12: float = 0.0
    P23: float = 0.0
    gamma11: float = 0.0
    gamma21: float = 0.0
    gamma23: float = 0.0


@dataclass(frozen=True)
class Solution:
    """Solver output for one scenario, scheme and mode.

    Energies are per ordered user and include local execution for partial and
    mixed modes.  Infeasible solutions carry no allocation and no energies.
    ``case_trace`` names the analytic case or search path that produced the
    allocation.
    """

    scheme: str
    mode: str
    feasible: bool
    symbol_interval: float
    allocation: Allocation | None = None
    energy1: float | None = None
    energy2: float | None = None
    case_trace: str = ""

    def __post_init__(self) -> None:
        if self.feasible:
            if self.allocation is None or self.energy1 is None or self.energy2 is None:
                raise InvalidParameterError("feasible solutions need allocation and energies")
        elif self.allocation is not None:
            raise InvalidParameterError("infeasible solutions must not carry an allocation")

    @property
    def total_energy(self) -> float | None:
        if not self.feasible:
            return None
        return self.energy1 + self.energy2

    @property
    def total_energy_joules(self) -> float | None:
        if not self.feasible:
            return None
        return self.total_energy * self.symbol_interval

    @property
    def energy1_joules(self) -> float | None:
        return None if self.energy1 is None else self.energy1 * self.symbol_interval

    @property
    def energy2_joules(self) -> float | None:
        return None if self.energy2 is None else self.energy2 * self.symbol_interval


def infeasible_solution(scheme: str, mode: str, symbol_interval: float, reason: str) -> Solution:
    return Solution(
        scheme=scheme,
        mode=mode,
        feasible=False,
        symbol_interval=symbol_interval,
        case_trace=reason,
    )


def check_solution(scenario: Scenario, solution: Solution, tol: float = 1e-6) -> list[str]:
    """Re-validate a solution against its scenario.

    Returns a list of violation messages; an empty list means the allocation
    passes bit accounting, latency, power budget and decoding-region checks
    within relative tolerance ``tol``.  Infeasible solutions pass trivially.
    """
    if not solution.feasible:
        return []
    a = solution.allocation
    errors: list[str] = []
    a1, a2 = scenario.alpha1, scenario.alpha2
    pb1, pb2 = scenario.link1.power_budget, scenario.link2.power_budget
    b1, b2 = scenario.user1.bits, scenario.user2.bits
    tau1, tau2, tau3 = a.tau

    for name, val in (("tau1", tau1), ("tau2", tau2), ("tau3", tau3)):
        if val < -tol:
            errors.append(f"{name} negative: {val}")
    for name, val, cap in (
        ("P11", a.P11, pb1),
        ("P12", a.P12, pb1),
        ("P21", a.P21, pb2),
        ("P23", a.P23, pb2),
    ):
        if val < -tol * cap:
            errors.append(f"{name} negative: {val}")
        if val > cap * (1.0 + tol):
            errors.append(f"{name} over budget: {val} > {cap}")

    if tau1 > tol:
        rate_tol = tol * (1.0 + a.R11 + a.R21)
        if not region_member(solution.scheme, a.R11, a.R21, a.P11, a.P21, a1, a2, rate_tol):
            errors.append("joint-slot rates outside the decoding region")
    if a.R12 > log2_1p(a1 * a.P12) + tol * (1.0 + a.R12):
        errors.append("user-1 solo rate above its power's capacity")
    if a.R23 > log2_1p(a2 * a.P23) + tol * (1.0 + a.R23):
        errors.append("user-2 solo rate above its power's capacity")

    for name, val in (
        ("gamma11", a.gamma11),
        ("gamma21", a.gamma21),
        ("gamma23", a.gamma23),
    ):
        if val < -tol or val > 1.0 + tol:
            errors.append(f"{name} outside [0, 1]: {val}")
    if a.gamma21 + a.gamma23 > 1.0 + tol:
        errors.append(f"user-2 fractions exceed 1: {a.gamma21 + a.gamma23}")

    if solution.mode == BINARY:
        lt1 = scenario.latency_budget(1, BINARY)
        lt2 = scenario.latency_budget(2, BINARY)
        sent1 = tau1 * a.R11 + tau2 * a.R12
        sent2 = tau1 * a.R21 + tau3 * a.R23
        if abs(sent1 - b1) > tol * b1:
            errors.append(f"user-1 bits {sent1} != {b1}")
        if abs(sent2 - b2) > tol * b2:
            errors.append(f"user-2 bits {sent2} != {b2}")
        if tau1 + tau2 > lt1 * (1.0 + tol):
            errors.append(f"user-1 latency violated: {tau1 + tau2} > {lt1}")
        if tau1 + tau2 + tau3 > lt2 * (1.0 + tol):
            errors.append(f"user-2 latency violated: {tau1 + tau2 + tau3} > {lt2}")
    else:
        errors.extend(_check_partial_timing(scenario, solution, tol))
    return errors


def _check_partial_timing(scenario: Scenario, solution: Solution, tol: float) -> list[str]:
    """Latency and bit checks for partial/mixed allocations, in seconds."""
    a = solution.allocation
    errors: list[str] = []
    ts = scenario.symbol_interval
    tau1, tau2, tau3 = a.tau
    b1, b2 = scenario.user1.bits, scenario.user2.bits
    lb1 = scenario.latency_budget(1, PARTIAL)
    lb2 = scenario.latency_budget(2, PARTIAL)
    model1 = scenario.user1.local_model
    model2 = scenario.user2.local_model
    dc1 = model1.cloud_time_per_bit if model1 is not None else 0.0
    dc2 = model2.cloud_time_per_bit if model2 is not None else 0.0

    # user 1 transmits in the joint slot (MA) or its solo slot (TDMA)
    u1_air = tau1 if tau1 > tol else tau2
    u1_rate = a.R11 if tau1 > tol else a.R12
    sent1 = u1_air * u1_rate
    if abs(sent1 - a.gamma11 * b1) > tol * b1 + tol:
        errors.append(f"user-1 slot bits {sent1} != gamma11*B1 {a.gamma11 * b1}")
    if u1_air * ts + dc1 * sent1 > lb1 * (1.0 + tol):
        errors.append("user-1 latency violated")

    sent21 = tau1 * a.R21
    sent23 = tau3 * a.R23
    if abs(sent21 - a.gamma21 * b2) > tol * b2 + tol:
        errors.append(f"user-2 joint-slot bits {sent21} != gamma21*B2 {a.gamma21 * b2}")
    if abs(sent23 - a.gamma23 * b2) > tol * b2 + tol:
        errors.append(f"user-2 solo-slot bits {sent23} != gamma23*B2 {a.gamma23 * b2}")
    if (tau1 + tau2 + tau3) * ts + dc2 * (sent21 + sent23) > lb2 * (1.0 + tol):
        errors.append("user-2 latency violated")
    return errors
