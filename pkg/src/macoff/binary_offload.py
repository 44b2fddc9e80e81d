"""Energy-minimal complete offloading of both tasks under four uplink schemes.

All solvers work on normalized quantities: bits, channel uses, bits per
channel use, watts.  User 1 is the user with the smaller transmission window
L1 (channel uses); user 2 has window L2 >= L1.  The slot template is

    [joint slot tau1][user-1 solo, up to L1][user-2 solo, up to L2]

Full multiple access admits a two-slot optimal solution with tau1 = L1 and a
one-dimensional search over user 2's joint-slot rate.  TDMA is a convex
one-dimensional problem in user 1's rate.  Sequential decoding without time
sharing and independent decoding keep three slots and are solved by cyclic
coordinate descent over (R11, R21, tau1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import (
    BINARY,
    FULL_MA,
    ID,
    LN2,
    SDWTS,
    TDMA,
    Allocation,
    InvalidParameterError,
    Scenario,
    Solution,
    infeasible_solution,
    log2_1p,
    pow2,
)
from .scalar_opt import (
    CONVEX,
    QUASICONVEX,
    BracketedProblem,
    minimize_scalar,
    multi_start_descent,
)

_BIG = 1e30


def _expm1_2(r: float) -> float:
    """2^r - 1 without OverflowError; saturates to inf."""
    if r > 1000.0:
        return math.inf
    return math.expm1(r * LN2)


def _log2_expm1(r: float) -> float:
    """log2(2^r - 1) for r > 0; for large r the -1 is negligible."""
    if r > 48.0:
        return r
    return math.log2(math.expm1(r * LN2))


@dataclass(frozen=True)
class BinaryParams:
    """Scenario reduced to the quantities the binary solvers consume."""

    b1: float
    b2: float
    lt1: float
    lt2: float
    a1: float
    a2: float
    pb1: float
    pb2: float

    def __post_init__(self) -> None:
        if self.lt1 > self.lt2 * (1.0 + 1e-12):
            raise InvalidParameterError(
                "user 1 must have the smaller transmission window: "
                f"{self.lt1} > {self.lt2}"
            )

    @property
    def cap1(self) -> float:
        return log2_1p(self.a1 * self.pb1)

    @property
    def cap2(self) -> float:
        return log2_1p(self.a2 * self.pb2)


def binary_params(scenario: Scenario) -> BinaryParams:
    return BinaryParams(
        b1=scenario.user1.bits,
        b2=scenario.user2.bits,
        lt1=scenario.latency_budget(1, BINARY),
        lt2=scenario.latency_budget(2, BINARY),
        a1=scenario.alpha1,
        a2=scenario.alpha2,
        pb1=scenario.link1.power_budget,
        pb2=scenario.link2.power_budget,
    )


def slot1_min_powers(
    a1: float,
    a2: float,
    pb1: float,
    pb2: float,
    R11: float,
    R21: float,
    tol: float = 1e-9,
) -> tuple[float, float, str] | None:
    """Cheapest joint-slot powers that make (R11, R21) jointly decodable.

    The minimum of P11 + P21 over the capacity region lies on the sum-rate
    line a1*P11 + a2*P21 = 2^(R11+R21) - 1; the four vertices of the feasible
    segment are enumerated and the cheapest valid one returned as
    (P11, P21, case) with case in {A-I, B-I, B-II, A-II}.  Returns None when
    the rate pair is not supportable within the power budgets.
    """
    if R11 <= 0.0 and R21 <= 0.0:
        return (0.0, 0.0, "zero")
    q1m1 = math.expm1(R11 * LN2)
    q2m1 = math.expm1(R21 * LN2)
    q1 = 1.0 + q1m1
    q2 = 1.0 + q2m1
    if not (math.isfinite(q1) and math.isfinite(q2) and math.isfinite(q1 * q2)):
        return None
    candidates = (
        (q1m1 / a1, q1 * q2m1 / a2, "A-I"),
        (q2 * q1m1 / a1, q2m1 / a2, "B-I"),
        (pb1, (q1 * q2 - 1.0 - a1 * pb1) / a2, "B-II"),
        ((q1 * q2 - 1.0 - a2 * pb2) / a1, pb2, "A-II"),
    )
    rate_tol = tol * (1.0 + R11 + R21)
    best = None
    for p11, p21, case in candidates:
        if p11 < -tol * pb1 or p21 < -tol * pb2:
            continue
        p11 = min(max(p11, 0.0), pb1)
        p21 = min(max(p21, 0.0), pb2)
        if R11 > log2_1p(a1 * p11) + rate_tol:
            continue
        if R21 > log2_1p(a2 * p21) + rate_tol:
            continue
        if R11 + R21 > log2_1p(a1 * p11 + a2 * p21) + rate_tol:
            continue
        if best is None or p11 + p21 < best[0] + best[1]:
            best = (p11, p21, case)
    return best


# ---------------------------------------------------------------------------
# single user


def solve_single_user(
    bits: float,
    window: float,
    alpha: float,
    power_budget: float,
    *,
    symbol_interval: float = 1.0,
    user: int = 1,
    tol: float = 1e-9,
) -> Solution:
    """One user offloading alone: transmit at B/L for the whole window.

    The per-bit energy (2^R - 1)/R grows with R, so the slowest rate meeting
    the deadline is optimal.  Infeasible when B/L exceeds the rate cap
    log2(1 + alpha * Pbar).
    """
    if bits <= 0.0 or window <= 0.0:
        raise InvalidParameterError("bits and window must be positive")
    rate = bits / window
    cap = log2_1p(alpha * power_budget)
    if rate > cap + tol * (1.0 + rate):
        return infeasible_solution(
            "single", BINARY, symbol_interval, "rate above single-user cap"
        )
    power = min(math.expm1(rate * LN2) / alpha, power_budget)
    energy = window * power
    if user == 1:
        alloc = Allocation(tau=(0.0, window, 0.0), R12=rate, P12=power, gamma11=1.0)
        e1, e2 = energy, 0.0
    else:
        alloc = Allocation(tau=(0.0, 0.0, window), R23=rate, P23=power, gamma23=1.0)
        e1, e2 = 0.0, energy
    return Solution(
        scheme="single",
        mode=BINARY,
        feasible=True,
        symbol_interval=symbol_interval,
        allocation=alloc,
        energy1=e1,
        energy2=e2,
        case_trace=f"single-user-{user}",
    )


# ---------------------------------------------------------------------------
# full multiple access


@dataclass(frozen=True)
class FullMaBounds:
    """Feasible range of user 2's joint-slot rate under full multiple access.

    r_a caps R21 by user 2's own budget, r_b by the sum-rate constraint at
    full powers, and r_c is the smallest R21 for which the solo slot can still
    carry user 2's remaining bits.  ``user1_ok`` is the gate that user 1 can
    sustain B1/L1 alone.
    """

    r_a: float
    r_b: float
    r_c: float
    user1_ok: bool
    feasible: bool

    @property
    def lower(self) -> float:
        return max(0.0, self.r_c)

    @property
    def upper(self) -> float:
        return min(self.r_a, self.r_b)


def full_ma_bounds(source: Scenario | BinaryParams, tol: float = 1e-9) -> FullMaBounds:
    p = source if isinstance(source, BinaryParams) else binary_params(source)
    r11 = p.b1 / p.lt1
    r_a = p.cap2
    r_b = log2_1p(p.a1 * p.pb1 + p.a2 * p.pb2) - r11
    r_c = (p.b2 - (p.lt2 - p.lt1) * p.cap2) / p.lt1
    user1_ok = r11 <= p.cap1 + tol * (1.0 + r11)
    feasible = user1_ok and max(0.0, r_c) <= min(r_a, r_b) + tol * (1.0 + abs(r_c))
    return FullMaBounds(r_a=r_a, r_b=r_b, r_c=r_c, user1_ok=user1_ok, feasible=feasible)


def solve_full_ma(scenario: Scenario, tol: float = 1e-9) -> Solution:
    """Closed-form full multiple access solution.

    User 1 spends the whole window in the joint slot at R11 = B1/L1; the
    remaining search over R21 is piecewise convex with analytic stationary
    points per power-recovery case, so the minimum is one of: the interval
    endpoints, a clamped stationary point, or a case-switchover rate.
    """
    p = binary_params(scenario)
    ts = scenario.symbol_interval
    bounds = full_ma_bounds(p, tol)
    if not bounds.feasible:
        reason = "user-1 rate above cap" if not bounds.user1_ok else "empty R21 interval"
        return infeasible_solution(FULL_MA, BINARY, ts, reason)
    r11 = p.b1 / p.lt1
    q1m1 = math.expm1(r11 * LN2)
    q1 = 1.0 + q1m1
    span3 = p.lt2 - p.lt1
    lo = bounds.lower
    hi = min(bounds.upper, p.b2 / p.lt1)
    if lo > hi:
        lo = hi = min(lo, p.b2 / p.lt1)

    # stationary points of the four power-recovery cases and the two
    # switchover rates where the active recovery changes
    labels: dict[float, str] = {}

    def add(r: float, label: str) -> None:
        if not math.isfinite(r):
            return
        r = min(max(r, lo), hi)
        labels.setdefault(r, label)

    add(lo, "endpoint-lo")
    add(hi, "endpoint-hi")
    if p.lt2 > p.lt1:
        add(p.b2 / p.lt2 - span3 * p.b1 / (p.lt1 * p.lt2), "stationary-I")
        add(
            p.b2 / p.lt2 - span3 * (r11 + math.log2(p.a2 / p.a1)) / p.lt2,
            "stationary-A-II",
        )
        add(
            p.b2 / p.lt2 - span3 * log2_1p((p.a2 / p.a1) * q1m1) / p.lt2,
            "stationary-B-I",
        )
    add(log2_1p(p.a2 * p.pb2 / q1), "switch-A")
    if q1m1 > 0.0 and p.a1 * p.pb1 / q1m1 > 0.0:
        add(math.log2(p.a1 * p.pb1 / q1m1), "switch-B")

    bit_tol = tol * p.b2

    def slot3(r21: float):
        rem = p.b2 - p.lt1 * r21
        if rem < -bit_tol:
            return None
        if rem <= bit_tol:
            return (0.0, 0.0, 0.0)
        if span3 <= 0.0:
            return None
        r23 = rem / span3
        if r23 > p.cap2 + tol * (1.0 + r23):
            return None
        p23 = min(math.expm1(r23 * LN2) / p.a2, p.pb2)
        return (r23, p23, span3 * p23)

    best = None
    for r21 in sorted(labels):
        tail = slot3(r21)
        if tail is None:
            continue
        powers = slot1_min_powers(p.a1, p.a2, p.pb1, p.pb2, r11, r21, tol)
        if powers is None:
            continue
        p11, p21, case = powers
        r23, p23, e3 = tail
        energy = p.lt1 * (p11 + p21) + e3
        if best is None or energy < best[0]:
            best = (energy, r21, p11, p21, r23, p23, e3, case, labels[r21])
    if best is None:
        return infeasible_solution(FULL_MA, BINARY, ts, "no feasible candidate")
    energy, r21, p11, p21, r23, p23, e3, case, label = best
    tau3 = span3 if r23 > 0.0 else 0.0
    alloc = Allocation(
        tau=(p.lt1, 0.0, tau3),
        R11=r11,
        R21=r21,
        R23=r23,
        P11=p11,
        P21=p21,
        P23=p23,
        gamma11=1.0,
        gamma21=min(1.0, p.lt1 * r21 / p.b2),
        gamma23=max(0.0, 1.0 - p.lt1 * r21 / p.b2),
    )
    return Solution(
        scheme=FULL_MA,
        mode=BINARY,
        feasible=True,
        symbol_interval=ts,
        allocation=alloc,
        energy1=p.lt1 * p11,
        energy2=p.lt1 * p21 + e3,
        case_trace=f"{case}/{label}",
    )


# ---------------------------------------------------------------------------
# TDMA


def _tdma_interval(p: BinaryParams, tol: float) -> tuple[float, float] | None:
    gate = p.cap2 * p.lt2 - p.b2
    if gate <= tol * p.b2:
        return None
    lo = max(p.b1 / p.lt1, p.cap2 * p.b1 / gate)
    hi = p.cap1
    if lo > hi + tol * (1.0 + hi):
        return None
    return (lo, max(lo, hi))


def _solve_tdma_params(p: BinaryParams, ts: float, tol: float) -> Solution:
    interval = _tdma_interval(p, tol)
    if interval is None:
        return infeasible_solution(TDMA, BINARY, ts, "no rate meets both windows")
    lo, hi = interval
    hi = max(lo, hi)

    def objective(r1: float) -> float:
        tau2 = p.b1 / r1
        span = p.lt2 - tau2
        if span <= 0.0:
            return math.inf
        r2 = p.b2 / span
        return tau2 * math.expm1(r1 * LN2) / p.a1 + span * math.expm1(r2 * LN2) / p.a2

    r1, _ = minimize_scalar(BracketedProblem(objective, lo, hi, CONVEX))
    tau2 = p.b1 / r1
    tau3 = p.lt2 - tau2
    r2 = p.b2 / tau3
    p1 = min(math.expm1(r1 * LN2) / p.a1, p.pb1)
    p2 = min(math.expm1(r2 * LN2) / p.a2, p.pb2)
    alloc = Allocation(
        tau=(0.0, tau2, tau3),
        R12=r1,
        R23=r2,
        P12=p1,
        P23=p2,
        gamma11=1.0,
        gamma23=1.0,
    )
    kind = "interior"
    if abs(r1 - lo) <= 1e-9 * (1.0 + lo):
        kind = "endpoint-lo"
    elif abs(r1 - hi) <= 1e-9 * (1.0 + hi):
        kind = "endpoint-hi"
    return Solution(
        scheme=TDMA,
        mode=BINARY,
        feasible=True,
        symbol_interval=ts,
        allocation=alloc,
        energy1=tau2 * p1,
        energy2=tau3 * p2,
        case_trace=f"tdma/{kind}",
    )


def solve_tdma(scenario: Scenario, tol: float = 1e-9) -> Solution:
    """Time-division uplink: user 1 transmits first, then user 2.

    Eliminating user 2's rate through the latency equality leaves a convex
    problem in R1 on an explicit interval.
    """
    return _solve_tdma_params(binary_params(scenario), scenario.symbol_interval, tol)


# ---------------------------------------------------------------------------
# three-slot schemes: sequential decoding without time sharing, independent
# decoding


def _req_rates(p: BinaryParams, tau: float) -> tuple[float, float]:
    """Smallest joint-slot rates for which the solo slots can finish the
    tasks by their deadlines, +inf when even the solo caps cannot."""
    span3 = p.lt2 - p.lt1
    if tau <= 0.0:
        r1 = 0.0 if p.b1 <= p.lt1 * p.cap1 * (1.0 + 1e-12) else math.inf
        r2 = 0.0 if p.b2 <= span3 * p.cap2 * (1.0 + 1e-12) else math.inf
        return r1, r2
    r1 = max(0.0, (p.b1 - (p.lt1 - tau) * p.cap1) / tau)
    r2 = max(0.0, (p.b2 - span3 * p.cap2) / tau)
    return r1, r2


def _sdwts_slack(p: BinaryParams, order: int):
    def slack(tau: float) -> float:
        r1, r2 = _req_rates(p, tau)
        if not (math.isfinite(r1) and math.isfinite(r2)):
            return -_BIG
        if order == 1:
            own = p.cap1 - r1
            if r2 <= 0.0:
                inter = _BIG
            else:
                inter = math.log2(p.a2 * p.pb2) - r1 - _log2_expm1(r2)
        else:
            own = p.cap2 - r2
            if r1 <= 0.0:
                inter = _BIG
            else:
                inter = math.log2(p.a1 * p.pb1) - r2 - _log2_expm1(r1)
        return min(own, inter)

    return slack


def _id_slack(p: BinaryParams):
    def slack(tau: float) -> float:
        r1, r2 = _req_rates(p, tau)
        if not (math.isfinite(r1) and math.isfinite(r2)):
            return -_BIG
        if r1 + r2 > 1000.0:
            return -1.0 - r1 - r2
        s1, s2 = pow2(r1), pow2(r2)
        d = s1 + s2 - s1 * s2
        if d <= 0.0:
            return -1.0 - r1 - r2
        slacks = [p.cap1 - r1, p.cap2 - r2]
        if r1 > 0.0:
            slacks.append(math.log2(p.a1 * p.pb1) - math.log2(s2 * (s1 - 1.0) / d))
        if r2 > 0.0:
            slacks.append(math.log2(p.a2 * p.pb2) - math.log2(s1 * (s2 - 1.0) / d))
        return min(slacks)

    return slack


def _scan_tau(p: BinaryParams, slack_fn, n: int = 1025) -> tuple[float, float]:
    """Maximize the feasibility slack over tau1 in [0, L1]: coarse scan plus a
    golden-section refinement around the best cell."""
    best_tau, best_slack = 0.0, -math.inf
    step = p.lt1 / (n - 1)
    for i in range(n):
        tau = i * step
        s = slack_fn(tau)
        if s > best_slack:
            best_tau, best_slack = tau, s
    lo = max(0.0, best_tau - step)
    hi = min(p.lt1, best_tau + step)
    tau, neg = minimize_scalar(
        BracketedProblem(lambda t: -slack_fn(t), lo, hi, QUASICONVEX),
        x_tol=1e-9 * (p.lt1 + 1.0),
    )
    if -neg > best_slack:
        best_tau, best_slack = tau, -neg
    return best_tau, best_slack


def _three_slot_objective(p: BinaryParams, power_fn):
    span3 = p.lt2 - p.lt1
    bit1 = 1e-12 * p.b1
    bit2 = 1e-12 * p.b2

    def objective(x) -> float:
        r11, r21, tau = x
        if tau < 0.0 or tau > p.lt1 or r11 < 0.0 or r21 < 0.0:
            return math.inf
        powers = power_fn(r11, r21)
        if powers is None:
            return math.inf
        p11, p21 = powers
        if p11 > p.pb1 * (1.0 + 1e-12) or p21 > p.pb2 * (1.0 + 1e-12):
            return math.inf
        total = tau * (p11 + p21)
        rem1 = p.b1 - tau * r11
        if rem1 < -bit1:
            return math.inf
        if rem1 > bit1:
            span2 = p.lt1 - tau
            if span2 <= 0.0:
                return math.inf
            r12 = rem1 / span2
            if r12 > p.cap1 * (1.0 + 1e-12):
                return math.inf
            total += span2 * _expm1_2(r12) / p.a1
        rem2 = p.b2 - tau * r21
        if rem2 < -bit2:
            return math.inf
        if rem2 > bit2:
            if span3 <= 0.0:
                return math.inf
            r23 = rem2 / span3
            if r23 > p.cap2 * (1.0 + 1e-12):
                return math.inf
            total += span3 * _expm1_2(r23) / p.a2
        return total

    return objective


def _sdwts_powers(p: BinaryParams, order: int):
    def powers(r11: float, r21: float):
        if order == 1:
            return (
                _expm1_2(r11) / p.a1,
                pow2(r11) * _expm1_2(r21) / p.a2,
            )
        return (
            pow2(r21) * _expm1_2(r11) / p.a1,
            _expm1_2(r21) / p.a2,
        )

    return powers


def _id_powers(p: BinaryParams):
    def powers(r11: float, r21: float):
        s1, s2 = pow2(r11), pow2(r21)
        d = s1 + s2 - s1 * s2
        if d <= 1e-300:
            return None
        return (s2 * (s1 - 1.0) / (p.a1 * d), s1 * (s2 - 1.0) / (p.a2 * d))

    return powers


def _common_rate_bounds(p: BinaryParams):
    """Bits-accounting and solo-slot bounds shared by the three-slot schemes."""
    span3 = p.lt2 - p.lt1

    def r11_bits(x):
        _, _, tau = x
        lo, hi = 0.0, math.inf
        if tau > 0.0:
            hi = p.b1 / tau
            lo = max(0.0, (p.b1 - (p.lt1 - tau) * p.cap1) / tau)
        return lo, hi

    def r21_bits(x):
        _, _, tau = x
        lo, hi = 0.0, math.inf
        if tau > 0.0:
            hi = p.b2 / tau
            lo = max(0.0, (p.b2 - span3 * p.cap2) / tau)
        elif p.b2 > span3 * p.cap2 * (1.0 + 1e-12):
            return 1.0, 0.0  # empty: without a joint slot user 2 cannot finish
        return lo, hi

    def tau_bounds(x):
        r11, r21, _ = x
        lo, hi = 0.0, p.lt1
        if r11 > 0.0:
            hi = min(hi, p.b1 / r11)
        if r21 > 0.0:
            hi = min(hi, p.b2 / r21)
        if r11 < p.cap1:
            hi = min(hi, (p.cap1 * p.lt1 - p.b1) / (p.cap1 - r11))
        need2 = p.b2 - span3 * p.cap2
        if need2 > 0.0:
            if r21 <= 0.0:
                return 1.0, 0.0
            lo = max(lo, need2 / r21)
        return lo, hi

    return r11_bits, r21_bits, tau_bounds


def _sdwts_bounds(p: BinaryParams, order: int):
    r11_bits, r21_bits, tau_bounds = _common_rate_bounds(p)

    def r11_gen(x):
        lo, hi = r11_bits(x)
        r21 = x[1]
        if order == 1:
            hi = min(hi, p.cap1)
            if r21 > 0.0:
                arg = p.a2 * p.pb2 / math.expm1(r21 * LN2)
                if arg <= 1.0:
                    return []
                hi = min(hi, math.log2(arg))
        else:
            hi = min(hi, log2_1p(p.a1 * p.pb1 / pow2(r21)))
        return [(lo, hi)]

    def r21_gen(x):
        lo, hi = r21_bits(x)
        r11 = x[0]
        if order == 1:
            hi = min(hi, log2_1p(p.a2 * p.pb2 / pow2(r11)))
        else:
            hi = min(hi, p.cap2)
            if r11 > 0.0:
                arg = p.a1 * p.pb1 / math.expm1(r11 * LN2)
                if arg <= 1.0:
                    return []
                hi = min(hi, math.log2(arg))
        return [(lo, hi)]

    def tau_gen(x):
        return [tau_bounds(x)]

    return [r11_gen, r21_gen, tau_gen]


def _id_bounds(p: BinaryParams):
    r11_bits, r21_bits, tau_bounds = _common_rate_bounds(p)

    def r11_gen(x):
        lo, hi = r11_bits(x)
        s2 = pow2(x[1])
        t_max = s2 * (1.0 + p.a1 * p.pb1) / (s2 * (1.0 + p.a1 * p.pb1) - p.a1 * p.pb1)
        if s2 > 1.0:
            t2 = p.a2 * p.pb2 * s2 / ((s2 - 1.0) * (1.0 + p.a2 * p.pb2))
            t_max = min(t_max, t2)
        if t_max <= 1.0:
            return []
        return [(lo, min(hi, math.log2(t_max)))]

    def r21_gen(x):
        lo, hi = r21_bits(x)
        s1 = pow2(x[0])
        t_max = s1 * (1.0 + p.a2 * p.pb2) / (s1 * (1.0 + p.a2 * p.pb2) - p.a2 * p.pb2)
        if s1 > 1.0:
            t2 = p.a1 * p.pb1 * s1 / ((s1 - 1.0) * (1.0 + p.a1 * p.pb1))
            t_max = min(t_max, t2)
        if t_max <= 1.0:
            return []
        return [(lo, min(hi, math.log2(t_max)))]

    def tau_gen(x):
        return [tau_bounds(x)]

    return [r11_gen, r21_gen, tau_gen]


def _pinned_solo_inits(p: BinaryParams, power_fn, objective, n: int = 33):
    """Starting points on the curves where a solo slot runs at its rate cap.

    Pinning a solo slot at cap locks tau and the matching joint-slot rate
    together (tau * R equals the bits the solo slot cannot carry), a curve
    the axis-parallel descent cannot slide along.  Each curve is scanned
    over its feasible tau window with the free rate solved exactly, and the
    best point per curve is handed back as an extra start.
    """
    span3 = p.lt2 - p.lt1
    need2 = p.b2 - span3 * p.cap2
    tiny = 1e-9 * p.lt1

    def power_ok(r11: float, r21: float) -> bool:
        powers = power_fn(r11, r21)
        if powers is None:
            return False
        return (
            powers[0] <= p.pb1 * (1.0 + 1e-12)
            and powers[1] <= p.pb2 * (1.0 + 1e-12)
        )

    def free_cap(pinned: float, lo: float, axis: int):
        # largest free rate keeping both powers inside their budgets;
        # powers grow with either rate, so one bisection finds the edge
        def ok(r: float) -> bool:
            return power_ok(r, pinned) if axis == 0 else power_ok(pinned, r)

        if not ok(lo):
            return None
        hi = 80.0
        if ok(hi):
            return hi
        for _ in range(44):
            mid = 0.5 * (lo + hi)
            if ok(mid):
                lo = mid
            else:
                hi = mid
        return lo

    def curve_point(tau: float, axis: int):
        span2 = p.lt1 - tau
        if axis == 0:
            pinned = need2 / tau
            lo = max(0.0, (p.b1 - span2 * p.cap1) / tau)
        else:
            pinned = max(0.0, (p.b1 - span2 * p.cap1) / tau)
            lo = max(0.0, need2 / tau) if need2 > 0.0 else 0.0
        hi = free_cap(pinned, lo, axis)
        if hi is None or hi < lo:
            return None
        if axis == 0:
            fn = lambda r: objective((r, pinned, tau))
        else:
            fn = lambda r: objective((pinned, r, tau))
        r, value = minimize_scalar(BracketedProblem(fn, lo, hi))
        if not math.isfinite(value):
            return None
        return value, ((r, pinned, tau) if axis == 0 else (pinned, r, tau))

    inits = []
    for axis, start in (
        (0, need2 / p.cap2 if need2 > 0.0 else math.inf),
        (1, p.lt1 - p.b1 / p.cap1),
    ):
        start = max(start, tiny)
        if start > p.lt1:
            continue
        taus = [start + (p.lt1 - start) * i / (n - 1) for i in range(n)]
        scored = [curve_point(t, axis) for t in taus]
        k = None
        for i, res in enumerate(scored):
            if res is not None and (k is None or res[0] < scored[k][0]):
                k = i
        if k is None:
            continue
        lo_t = taus[k - 1] if k > 0 else taus[k]
        hi_t = taus[k + 1] if k + 1 < n else taus[k]

        def along(t: float, _axis=axis) -> float:
            res = curve_point(t, _axis)
            return res[0] if res is not None else math.inf

        t_best, v_best = minimize_scalar(BracketedProblem(along, lo_t, hi_t))
        best = scored[k]
        if v_best < best[0]:
            refined = curve_point(t_best, axis)
            if refined is not None and refined[0] < best[0]:
                best = refined
        inits.append(best[1])
    return inits


def _three_slot_inits(p: BinaryParams, slack_fn, rate_cap_fn, tau_star: float):
    """Up to four deterministic starting points: requirement rates at the
    best-slack tau, a mid-rate variant there, and requirement rates at the
    window edge and at smaller joint slots."""
    inits = []
    seen = set()
    for tau in (tau_star, p.lt1, 0.5 * p.lt1, 0.25 * p.lt1):
        tau = min(max(tau, 0.0), p.lt1)
        if slack_fn(tau) < 0.0:
            continue
        r1, r2 = _req_rates(p, tau)
        key = (round(r1, 12), round(r2, 12), round(tau, 6))
        if key in seen:
            continue
        seen.add(key)
        inits.append((r1, r2, tau))
        if len(inits) == 1:
            cap = rate_cap_fn(r1, r2)
            if cap is not None and cap > r2:
                inits.append((r1, 0.5 * (r2 + cap), tau))
        if len(inits) >= 4:
            break
    return inits


def _assemble_three_slot(
    p: BinaryParams,
    ts: float,
    scheme: str,
    point,
    power_fn,
    case_trace: str,
) -> Solution:
    r11, r21, tau = point
    p11, p21 = power_fn(r11, r21)
    p11 = min(max(p11, 0.0), p.pb1)
    p21 = min(max(p21, 0.0), p.pb2)
    span2 = p.lt1 - tau
    span3 = p.lt2 - p.lt1
    rem1 = max(0.0, p.b1 - tau * r11)
    rem2 = max(0.0, p.b2 - tau * r21)
    r12 = rem1 / span2 if rem1 > 1e-12 * p.b1 and span2 > 0.0 else 0.0
    r23 = rem2 / span3 if rem2 > 1e-12 * p.b2 and span3 > 0.0 else 0.0
    p12 = min(math.expm1(r12 * LN2) / p.a1, p.pb1) if r12 > 0.0 else 0.0
    p23 = min(math.expm1(r23 * LN2) / p.a2, p.pb2) if r23 > 0.0 else 0.0
    e1 = tau * p11 + span2 * p12
    e2 = tau * p21 + span3 * p23
    g11 = min(1.0, tau * r11 / p.b1)
    g21 = min(1.0, tau * r21 / p.b2)
    alloc = Allocation(
        tau=(tau, span2, span3 if r23 > 0.0 else 0.0),
        R11=r11,
        R21=r21,
        R12=r12,
        R23=r23,
        P11=p11,
        P21=p21,
        P12=p12,
        P23=p23,
        gamma11=g11,
        gamma21=g21,
        gamma23=max(0.0, 1.0 - g21),
    )
    return Solution(
        scheme=scheme,
        mode=BINARY,
        feasible=True,
        symbol_interval=ts,
        allocation=alloc,
        energy1=e1,
        energy2=e2,
        case_trace=case_trace,
    )


def _retag(sol: Solution, scheme: str, trace: str) -> Solution:
    return Solution(
        scheme=scheme,
        mode=sol.mode,
        feasible=True,
        symbol_interval=sol.symbol_interval,
        allocation=sol.allocation,
        energy1=sol.energy1,
        energy2=sol.energy2,
        case_trace=trace,
    )


def solve_sdwts(
    scenario: Scenario,
    tol: float = 1e-9,
    rel_tol: float = 1e-9,
    max_iters: int = 500,
) -> Solution:
    """Sequential decoding without time sharing.

    Both decoding orders are searched by coordinate descent over
    (R11, R21, tau1); a plain time-division split (empty joint slot with a
    free user-1 slot length) is also evaluated, since the three-slot template
    pins the solo spans and can miss it.
    """
    p = binary_params(scenario)
    ts = scenario.symbol_interval
    best: tuple[float, Solution] | None = None
    for order in (1, 2):
        slack_fn = _sdwts_slack(p, order)
        tau_star, slack = _scan_tau(p, slack_fn)
        if slack < 0.0:
            continue
        power_fn = _sdwts_powers(p, order)

        if order == 1:
            def cap_fn(r1, r2, _p=p):
                return log2_1p(_p.a2 * _p.pb2 / pow2(r1))
        else:
            def cap_fn(r1, r2, _p=p):
                return _p.cap2

        objective = _three_slot_objective(p, power_fn)
        inits = _three_slot_inits(p, slack_fn, cap_fn, tau_star)
        inits += _pinned_solo_inits(p, power_fn, objective)
        report = multi_start_descent(
            objective,
            _sdwts_bounds(p, order),
            inits,
            shapes=CONVEX,
            rel_tol=rel_tol,
            max_iters=max_iters,
        )
        if report is None:
            continue
        if best is None or report.final_objective < best[0]:
            sol = _assemble_three_slot(
                p, ts, SDWTS, report.point, power_fn, f"sdwts/order{order}"
            )
            best = (report.final_objective, sol)
    tdma = _solve_tdma_params(p, ts, tol)
    if tdma.feasible and (best is None or tdma.total_energy < best[0]):
        best = (tdma.total_energy, _retag(tdma, SDWTS, "sdwts/tdma-structure"))
    if best is None:
        return infeasible_solution(SDWTS, BINARY, ts, "no decodable joint slot")
    return best[1]


def solve_id(
    scenario: Scenario,
    tol: float = 1e-9,
    rel_tol: float = 1e-9,
    max_iters: int = 500,
) -> Solution:
    """Independent decoding: each user is decoded against the other's
    interference, which bounds the joint-slot rates to 2^-R11 + 2^-R21 > 1.

    Solved like the sequential scheme, including the time-division candidate;
    whenever TDMA is feasible it is also optimal here.
    """
    p = binary_params(scenario)
    ts = scenario.symbol_interval
    best: tuple[float, Solution] | None = None
    slack_fn = _id_slack(p)
    tau_star, slack = _scan_tau(p, slack_fn)
    if slack >= 0.0:
        power_fn = _id_powers(p)

        def cap_fn(r1, r2, _p=p):
            s1 = pow2(r1)
            t_max = s1 * (1.0 + _p.a2 * _p.pb2) / (
                s1 * (1.0 + _p.a2 * _p.pb2) - _p.a2 * _p.pb2
            )
            if s1 > 1.0:
                t2 = _p.a1 * _p.pb1 * s1 / ((s1 - 1.0) * (1.0 + _p.a1 * _p.pb1))
                t_max = min(t_max, t2)
            return math.log2(t_max) if t_max > 1.0 else None

        objective = _three_slot_objective(p, power_fn)
        inits = _three_slot_inits(p, slack_fn, cap_fn, tau_star)
        inits += _pinned_solo_inits(p, power_fn, objective)
        report = multi_start_descent(
            objective,
            _id_bounds(p),
            inits,
            shapes=CONVEX,
            rel_tol=rel_tol,
            max_iters=max_iters,
        )
        if report is not None:
            sol = _assemble_three_slot(
                p, ts, ID, report.point, power_fn, "id/three-slot"
            )
            best = (report.final_objective, sol)
    tdma = _solve_tdma_params(p, ts, tol)
    if tdma.feasible and (best is None or tdma.total_energy < best[0]):
        best = (tdma.total_energy, _retag(tdma, ID, "id/tdma-structure"))
    if best is None:
        return infeasible_solution(ID, BINARY, ts, "no decodable joint slot")
    return best[1]


_SOLVERS = {FULL_MA: solve_full_ma, TDMA: solve_tdma, SDWTS: solve_sdwts, ID: solve_id}


def solve_binary(scenario: Scenario, scheme: str, **kwargs) -> Solution:
    """Dispatch to the scheme solver."""
    try:
        solver = _SOLVERS[scheme]
    except KeyError:
        raise InvalidParameterError(f"unknown scheme {scheme!r}") from None
    return solver(scenario, **kwargs)


def feasibility_slack(scenario: Scenario, scheme: str) -> float:
    """Signed feasibility margin of a scheme in rate units (bits per channel
    use), normalized by 1 + the gating quantity.  Positive means feasible.

    Used to keep randomly sampled test scenarios away from feasibility
    boundaries.
    """
    p = binary_params(scenario)
    if scheme == FULL_MA:
        b = full_ma_bounds(p)
        r11 = p.b1 / p.lt1
        s1 = (p.cap1 - r11) / (1.0 + r11)
        s2 = (b.upper - b.lower) / (1.0 + abs(b.lower))
        return min(s1, s2)
    if scheme == TDMA:
        s1 = (p.cap2 - p.b2 / p.lt2) / (1.0 + p.cap2)
        if s1 <= 0.0:
            return s1
        gate = p.cap2 * p.lt2 - p.b2
        lo = max(p.b1 / p.lt1, p.cap2 * p.b1 / gate)
        return min(s1, (p.cap1 - lo) / (1.0 + p.cap1))
    if scheme == SDWTS:
        slack = max(
            _scan_tau(p, _sdwts_slack(p, 1))[1], _scan_tau(p, _sdwts_slack(p, 2))[1]
        )
    elif scheme == ID:
        slack = _scan_tau(p, _id_slack(p))[1]
    else:
        raise InvalidParameterError(f"unknown scheme {scheme!r}")
    # a feasible TDMA split also realizes these schemes
    tdma = feasibility_slack(scenario, TDMA)
    return max(slack / (1.0 + p.cap1 + p.cap2), tdma)


# ---------------------------------------------------------------------------
# binary offloading decision


@dataclass(frozen=True)
class CaseResult:
    """Energy of one offload/local combination, or why it is unavailable."""

    status: str  # "ok", "local-infeasible" or "offload-infeasible"
    energy: float | None = None


@dataclass(frozen=True)
class BinaryDecision:
    """Outcome of the four-way offloading decision."""

    offload_user1: bool | None
    offload_user2: bool | None
    feasible: bool
    cases: dict[str, CaseResult]
    solution: Solution | None


def decide_binary(scenario: Scenario, scheme: str = FULL_MA, tol: float = 1e-9) -> BinaryDecision:
    """Choose per-user offloading to minimize total energy.

    Compares local-local, each single-offload and the both-offload solution
    of the requested scheme.  Missing local energies mark the cases that need
    them as local-infeasible; ties go to fewer offloaders.
    """
    p = binary_params(scenario)
    ts = scenario.symbol_interval
    el1 = scenario.user1.local_energy
    el2 = scenario.user2.local_energy

    cases: dict[str, CaseResult] = {}
    candidates: list[tuple[float, int, int, str, Solution]] = []

    if el1 is not None and el2 is not None:
        cases["local-local"] = CaseResult("ok", el1 + el2)
        sol = Solution(
            scheme=scheme,
            mode=BINARY,
            feasible=True,
            symbol_interval=ts,
            allocation=Allocation(tau=(0.0, 0.0, 0.0)),
            energy1=el1,
            energy2=el2,
            case_trace="local-local",
        )
        candidates.append((el1 + el2, 0, 0, "local-local", sol))
    else:
        cases["local-local"] = CaseResult("local-infeasible")

    one = solve_single_user(p.b1, p.lt1, p.a1, p.pb1, symbol_interval=ts, user=1, tol=tol)
    if el2 is None:
        cases["offload-local"] = CaseResult("local-infeasible")
    elif not one.feasible:
        cases["offload-local"] = CaseResult("offload-infeasible")
    else:
        total = one.energy1 + el2
        cases["offload-local"] = CaseResult("ok", total)
        sol = Solution(
            scheme=scheme,
            mode=BINARY,
            feasible=True,
            symbol_interval=ts,
            allocation=one.allocation,
            energy1=one.energy1,
            energy2=el2,
            case_trace="offload-local",
        )
        candidates.append((total, 1, 1, "offload-local", sol))

    two = solve_single_user(p.b2, p.lt2, p.a2, p.pb2, symbol_interval=ts, user=2, tol=tol)
    if el1 is None:
        cases["local-offload"] = CaseResult("local-infeasible")
    elif not two.feasible:
        cases["local-offload"] = CaseResult("offload-infeasible")
    else:
        total = el1 + two.energy2
        cases["local-offload"] = CaseResult("ok", total)
        sol = Solution(
            scheme=scheme,
            mode=BINARY,
            feasible=True,
            symbol_interval=ts,
            allocation=two.allocation,
            energy1=el1,
            energy2=two.energy2,
            case_trace="local-offload",
        )
        candidates.append((total, 1, 2, "local-offload", sol))

    both = solve_binary(scenario, scheme)
    if both.feasible:
        cases["offload-offload"] = CaseResult("ok", both.total_energy)
        sol = Solution(
            scheme=scheme,
            mode=BINARY,
            feasible=True,
            symbol_interval=ts,
            allocation=both.allocation,
            energy1=both.energy1,
            energy2=both.energy2,
            case_trace=f"offload-offload/{both.case_trace}",
        )
        candidates.append((both.total_energy, 2, 3, "offload-offload", sol))
    else:
        cases["offload-offload"] = CaseResult("offload-infeasible")

    if not candidates:
        return BinaryDecision(None, None, False, cases, None)
    candidates.sort(key=lambda c: (c[0], c[1], c[2]))
    _, _, _, label, sol = candidates[0]
    return BinaryDecision(
        offload_user1=label in ("offload-local", "offload-offload"),
        offload_user2=label in ("local-offload", "offload-offload"),
        feasible=True,
        cases=cases,
        solution=sol,
    )
