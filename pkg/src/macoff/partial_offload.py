"""Partial and mixed offloading: split each task between the local CPU and
the cloud.

Offloaded bits travel on the uplink and then take ``cloud_time_per_bit``
seconds each to execute remotely; locally kept bits are computed with
voltage scaling over the full task latency, costing M * bits^3 / L^2 joules.
Transmission and downlink share the window Lbar = L - t_downlink.

With rates fixed, stretching every transmission to its latency limit is
never worse (slower is cheaper), so solvers search over rates and recover
the offloaded fractions from tight latency, clamped into [0, 1].  The
joint-decoding objectives are piecewise smooth; coordinate slices are
minimized piece by piece on a uniform subdivision augmented with the known
clamp breakpoints.  The turn-taking problems separate once the handover
time is fixed, leaving one exact scalar rate problem per user inside a
single line scan.  Every solver also tries the all-offload schedule of the
indivisible solvers, so a divisible task never costs more than an
indivisible one.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .model import (
    FULL_MA,
    MIXED,
    PARTIAL,
    TDMA,
    Allocation,
    InfeasibleLatencyError,
    InvalidParameterError,
    Scenario,
    Solution,
    infeasible_solution,
    log2_1p,
)
from .binary_offload import _expm1_2, slot1_min_powers, solve_full_ma, solve_tdma
from .scalar_opt import (
    QUASICONVEX,
    BracketedProblem,
    coordinate_descent,
    minimize_scalar,
    multi_start_descent,
)

_PIECES = 5


@dataclass(frozen=True)
class PartialParams:
    """Scenario quantities for the divisible-task solvers.

    Latencies are in seconds: l1, l2 bound the local computations, lbar1,
    lbar2 bound uplink plus cloud execution.  m1, m2 are chip constants
    (None when the user has no local compute model), dc1, dc2 the cloud
    seconds per offloaded bit.
    """

    b1: float
    b2: float
    l1: float
    l2: float
    lbar1: float
    lbar2: float
    a1: float
    a2: float
    pb1: float
    pb2: float
    ts: float
    m1: float | None
    m2: float | None
    dc1: float
    dc2: float

    @property
    def cap1(self) -> float:
        return log2_1p(self.a1 * self.pb1)

    @property
    def cap2(self) -> float:
        return log2_1p(self.a2 * self.pb2)

    @property
    def sum_cap(self) -> float:
        return log2_1p(self.a1 * self.pb1 + self.a2 * self.pb2)

    def local1(self, bits: float) -> float:
        # normalized: joules / symbol interval; rounding can leave a vanishing
        # residue even for a fully offloaded task, hence the relative guard
        if bits <= 1e-12 * self.b1:
            return 0.0
        return self.m1 * bits**3 / (self.l1**2 * self.ts)

    def local2(self, bits: float) -> float:
        if bits <= 1e-12 * self.b2:
            return 0.0
        return self.m2 * bits**3 / (self.l2**2 * self.ts)


def partial_params(
    scenario: Scenario, *, need_local1: bool = True, need_local2: bool = True
) -> PartialParams:
    lm1 = scenario.user1.local_model
    lm2 = scenario.user2.local_model
    if need_local1 and lm1 is None:
        raise InvalidParameterError("user 1 needs a local compute model to split its task")
    if need_local2 and lm2 is None:
        raise InvalidParameterError("user 2 needs a local compute model to split its task")
    return PartialParams(
        b1=scenario.user1.bits,
        b2=scenario.user2.bits,
        l1=scenario.user1.latency,
        l2=scenario.user2.latency,
        lbar1=scenario.latency_budget(1, PARTIAL),
        lbar2=scenario.latency_budget(2, PARTIAL),
        a1=scenario.alpha1,
        a2=scenario.alpha2,
        pb1=scenario.link1.power_budget,
        pb2=scenario.link2.power_budget,
        ts=scenario.symbol_interval,
        m1=lm1.chip_constant if lm1 is not None else None,
        m2=lm2.chip_constant if lm2 is not None else None,
        dc1=lm1.cloud_time_per_bit if lm1 is not None else 0.0,
        dc2=lm2.cloud_time_per_bit if lm2 is not None else 0.0,
    )


def _lattice_seeds(objective, ranges, n: int = 10, keep: int = 2):
    """Best cells of a coarse lattice, used as extra descent starts; the
    coordinate slices here are multimodal and a bad start can strand the
    descent in a poor basin."""
    axes = []
    for lo, hi in ranges:
        if hi <= lo:
            axes.append([lo])
        else:
            step = (hi - lo) / (n - 1)
            axes.append([lo + i * step for i in range(n)])
    scored = []
    for x in itertools.product(*axes):
        v = objective(x)
        if math.isfinite(v):
            scored.append((v, x))
    scored.sort(key=lambda t: t[0])
    return [x for _, x in scored[:keep]]


def _refine_line(fn, lo: float, hi: float, extra=(), samples: int = 48, max_refine: int = 8):
    """Presample-then-refine minimization of a piecewise-smooth 1-D function.

    Every sampled local minimum gets its own golden-section window, so
    separated basins are each probed; ``extra`` points are evaluated exactly,
    which lets callers anchor the scan to known good candidates.  Returns
    (argmin, value).
    """
    if hi <= lo:
        return lo, fn(lo)
    points = {lo + (hi - lo) * i / samples for i in range(samples + 1)}
    points.update(e for e in extra if lo <= e <= hi)
    xs = sorted(points)
    vs = [fn(x) for x in xs]
    best_i = min(range(len(xs)), key=lambda i: vs[i])
    best_x, best_v = xs[best_i], vs[best_i]
    dips = []
    for i, v in enumerate(vs):
        if not math.isfinite(v):
            continue
        left = vs[i - 1] if i > 0 else math.inf
        right = vs[i + 1] if i + 1 < len(vs) else math.inf
        if v <= left and v <= right:
            dips.append((v, i))
    dips.sort()
    for _, i in dips[:max_refine]:
        a = xs[max(i - 1, 0)]
        b = xs[min(i + 1, len(xs) - 1)]
        x, v = minimize_scalar(BracketedProblem(fn, a, b))
        if v < best_v:
            best_x, best_v = x, v
    return best_x, best_v


def _binary_anchor(scenario: Scenario, solver):
    """All-offload schedule used to seed a divisible search, or None.

    The indivisible solvers subtract cloud execution time from the windows,
    so they can reject scenarios the divisible ones accept.
    """
    try:
        sol = solver(scenario)
    except (InfeasibleLatencyError, InvalidParameterError):
        return None
    return sol if sol.feasible else None


_TRIAGE_ITERS = 24


def _staged_descent(objective, bounds, inits, rel_tol: float, max_iters: int):
    """Multi-start descent in two stages: a short triage of every start, then
    a full-depth polish from the best survivor.

    Starts stuck crawling along a curved valley burn their whole iteration
    budget without ever catching the winning basin, so only the best point
    earns the full budget.
    """
    report = multi_start_descent(
        objective,
        bounds,
        inits,
        shapes=QUASICONVEX,
        rel_tol=rel_tol,
        max_iters=min(_TRIAGE_ITERS, max_iters),
    )
    if report is None or report.converged or max_iters <= _TRIAGE_ITERS:
        return report
    polished = coordinate_descent(
        objective,
        bounds,
        report.point,
        shapes=QUASICONVEX,
        rel_tol=rel_tol,
        max_iters=max_iters - _TRIAGE_ITERS,
    )
    if polished.final_objective <= report.final_objective:
        return polished
    return report


def _pieces_with_breaks(lo: float, hi: float, breaks=(), n: int = _PIECES):
    """Split [lo, hi] into n uniform pieces plus cuts at the given interior
    breakpoints, so each slice piece is smooth for the line search."""
    if hi <= lo:
        return [(lo, hi)]
    cuts = {lo, hi}
    step = (hi - lo) / n
    for i in range(1, n):
        cuts.add(lo + i * step)
    for b in breaks:
        if math.isfinite(b) and lo < b < hi:
            cuts.add(b)
    points = sorted(cuts)
    return [(points[i], points[i + 1]) for i in range(len(points) - 1)]


# ---------------------------------------------------------------------------
# full multiple access, both tasks divisible


def _fullma_partial_detail(p: PartialParams, x, tol: float = 1e-9):
    """Evaluate a rate triple (R11, R21, R23); returns None when undecodable.

    Offloaded fractions are recovered from tight latencies and clamped; the
    tuple holds everything needed to rebuild the allocation.
    """
    r11, r21, r23 = x
    if r11 < 0.0 or r21 < 0.0 or r23 < 0.0:
        return None
    # slot 1 length: user 1 transmits until its deadline or until done
    tau1 = p.lbar1 / (p.ts + p.dc1 * r11)
    if r11 > 0.0:
        tau1 = min(tau1, p.b1 / r11)
    sent1 = tau1 * r11
    if sent1 > p.b1:
        sent1 = p.b1
    sent21 = min(tau1 * r21, p.b2)
    air21 = sent21 / r21 if r21 > 0.0 else 0.0
    # user 2 after slot 1: remaining window carries slot-3 air plus cloud time
    avail3 = p.lbar2 - tau1 * p.ts - p.dc2 * sent21
    if r23 > 0.0 and avail3 > 0.0:
        if r23 > p.cap2 * (1.0 + tol):
            return None
        sent23 = min(avail3 / (p.ts / r23 + p.dc2), p.b2 - sent21)
        sent23 = max(sent23, 0.0)
    else:
        sent23 = 0.0
    tau3 = sent23 / r23 if r23 > 0.0 else 0.0

    if r11 > 0.0 or r21 > 0.0:
        powers = slot1_min_powers(p.a1, p.a2, p.pb1, p.pb2, r11, r21, tol)
        if powers is None:
            return None
        p11, p21, _ = powers
    else:
        p11 = p21 = 0.0
    p23 = _expm1_2(r23) / p.a2 if sent23 > 0.0 else 0.0
    if p23 > p.pb2 * (1.0 + tol):
        return None

    total = tau1 * p11 + air21 * p21 + tau3 * p23
    e_loc1 = p.local1(p.b1 - sent1)
    e_loc2 = p.local2(p.b2 - sent21 - sent23)
    total += e_loc1 + e_loc2
    return (total, tau1, sent1, air21, sent21, tau3, sent23, p11, p21, p23, e_loc1, e_loc2)


def _fullma_partial_bounds(p: PartialParams):
    # breakpoint where user 1 can offload everything within its window
    if p.lbar1 > p.dc1 * p.b1:
        r11_full = p.b1 * p.ts / (p.lbar1 - p.dc1 * p.b1)
    else:
        r11_full = math.inf

    def r11_gen(x):
        hi = min(p.cap1, p.sum_cap - x[1])
        if hi < 0.0:
            return []
        return _pieces_with_breaks(0.0, hi, (r11_full,))

    def r21_gen(x):
        hi = min(p.cap2, p.sum_cap - x[0])
        if hi < 0.0:
            return []
        return _pieces_with_breaks(0.0, hi)

    def r23_gen(x):
        return _pieces_with_breaks(0.0, p.cap2)

    return [r11_gen, r21_gen, r23_gen]


def _partial_inits(p: PartialParams):
    c1, c2, cs = p.cap1, p.cap2, p.sum_cap
    return [
        (0.5 * c1, 0.5 * min(c2, cs - 0.5 * c1), 0.5 * c2),
        (0.0, 0.0, 0.0),
    ]


def solve_partial_full_ma(
    scenario: Scenario, rel_tol: float = 1e-9, max_iters: int = 500
) -> Solution:
    """Both tasks divisible, joint decoding in slot 1.

    Always feasible: keeping everything local is a valid point.  Coordinate
    descent over (R11, R21, R23) from several starts.
    """
    p = partial_params(scenario)

    def objective(x) -> float:
        d = _fullma_partial_detail(p, x)
        return math.inf if d is None else d[0]

    inits = _partial_inits(p) + _lattice_seeds(
        objective, [(0.0, p.cap1), (0.0, p.cap2), (0.0, p.cap2)]
    )
    anchor = _binary_anchor(scenario, solve_full_ma)
    if anchor is not None:
        inits.append(
            (anchor.allocation.R11, anchor.allocation.R21, anchor.allocation.R23)
        )
    report = _staged_descent(objective, _fullma_partial_bounds(p), inits, rel_tol, max_iters)
    if report is None:
        return infeasible_solution(FULL_MA, PARTIAL, p.ts, "no evaluable point")
    return _assemble_fullma_partial(p, report.point, PARTIAL, "partial-fullma")


def _assemble_fullma_partial(
    p: PartialParams, x, mode: str, trace: str, e1_extra: float = 0.0
) -> Solution:
    d = _fullma_partial_detail(p, x)
    total, tau1, sent1, air21, sent21, tau3, sent23, p11, p21, p23, el1, el2 = d
    r11, r21, r23 = x
    alloc = Allocation(
        tau=(tau1, 0.0, tau3),
        R11=r11 if sent1 > 0.0 else 0.0,
        R21=r21 if sent21 > 0.0 else 0.0,
        R23=r23 if sent23 > 0.0 else 0.0,
        P11=p11,
        P21=p21,
        P23=p23,
        gamma11=min(1.0, sent1 / p.b1),
        gamma21=min(1.0, sent21 / p.b2),
        gamma23=min(1.0, sent23 / p.b2),
    )
    return Solution(
        scheme=FULL_MA,
        mode=mode,
        feasible=True,
        symbol_interval=p.ts,
        allocation=alloc,
        energy1=tau1 * p11 + el1 + e1_extra,
        energy2=air21 * p21 + tau3 * p23 + el2,
        case_trace=trace,
    )


# ---------------------------------------------------------------------------
# TDMA, both tasks divisible


def _user1_air(p: PartialParams, r1: float, t2: float) -> float:
    """User-1 air time: the candidate slot length, cut by running out of bits
    or by its own latency (air plus cloud execution of the sent bits)."""
    return min(t2, p.b1 / r1, p.lbar1 / (p.ts + p.dc1 * r1))


def _tdma_partial_detail(p: PartialParams, x, tol: float = 1e-9):
    # x = (R1, R2, t2); t2 is the candidate user-1 slot length, which keeps
    # the low-energy valley axis-aligned (energy depends on air time, not on
    # the rate/fraction ratio)
    r1, r2, t2 = x
    if r1 < 0.0 or r2 < 0.0 or t2 < 0.0:
        return None
    if r1 > 0.0 and t2 > 0.0:
        air1 = _user1_air(p, r1, t2)
        g1 = min(1.0, air1 * r1 / p.b1)
        e1 = air1 * _expm1_2(r1) / p.a1
    else:
        air1, g1, e1 = 0.0, 0.0, 0.0
    if r2 > 0.0:
        rec = (p.lbar2 - air1 * p.ts) / (p.b2 * (p.ts / r2 + p.dc2))
        g2 = min(max(rec, 0.0), 1.0)
    else:
        g2 = 0.0
    tau3 = g2 * p.b2 / r2 if g2 > 0.0 else 0.0
    e2 = tau3 * _expm1_2(r2) / p.a2
    total = e1 + e2 + p.local1((1.0 - g1) * p.b1) + p.local2((1.0 - g2) * p.b2)
    return (total, air1, tau3, g1, g2, e1, e2)


def _stretched_branch(p: PartialParams, user: int, window_sec: float, bits: float):
    """Cheapest way to push some of one task through a window of its own.

    The transmission stretches over the whole window (slower is cheaper), cut
    short only by running out of bits; rate 0 keeps everything local.  Exact
    piecewise 1-D search over the rate, with a cut where the bits run out
    exactly at the window end.  Returns (energy, rate, air, sent).
    """
    if user == 1:
        alpha, cap, dc, local = p.a1, p.cap1, p.dc1, p.local1
    else:
        alpha, cap, dc, local = p.a2, p.cap2, p.dc2, p.local2
    e_local = local(bits)
    best = (e_local, 0.0, 0.0, 0.0)
    if window_sec <= 0.0 or bits <= 0.0 or cap <= 0.0:
        return best

    def air_of(r: float) -> float:
        return min(window_sec / (p.ts + dc * r), bits / r)

    def value(r: float) -> float:
        if r <= 0.0:
            return e_local
        air = air_of(r)
        return air * _expm1_2(r) / alpha + local(bits - air * r)

    breaks = []
    if window_sec > dc * bits:
        breaks.append(bits * p.ts / (window_sec - dc * bits))
    for lo, hi in _pieces_with_breaks(0.0, cap, breaks, n=3):
        if hi <= lo:
            continue
        r, v = minimize_scalar(BracketedProblem(value, lo, hi))
        if v < best[0] and r > 0.0:
            air = air_of(r)
            best = (v, r, air, air * r)
    return best


def _capped_branch(p: PartialParams, h: float):
    """User 1 transmitting for exactly h channel uses: exact rate search.

    The rate is bounded so neither the bits nor the latency run out before
    the handover; within those bounds the objective is convex.  Returns
    (energy, rate).
    """
    e_local = p.local1(p.b1)
    if h <= 0.0:
        return e_local, 0.0
    hi = min(p.cap1, p.b1 / h)
    if p.dc1 > 0.0:
        hi = min(hi, (p.lbar1 / h - p.ts) / p.dc1)
    if hi <= 0.0:
        return e_local, 0.0

    def value(r: float) -> float:
        if r <= 0.0:
            return e_local
        return h * _expm1_2(r) / p.a1 + p.local1(p.b1 - h * r)

    r, v = minimize_scalar(BracketedProblem(value, 0.0, hi))
    if v < e_local and r > 0.0:
        return v, r
    return e_local, 0.0


def _forced_rate2(p: PartialParams, h: float, tol: float = 1e-9) -> float | None:
    """Slowest rate that still ships all of task 2 after the handover."""
    denom = p.lbar2 - h * p.ts - p.dc2 * p.b2
    if denom <= 0.0:
        return None
    r2 = p.b2 * p.ts / denom
    if r2 > p.cap2 * (1.0 + tol):
        return None
    return r2


def solve_partial_tdma(
    scenario: Scenario, rel_tol: float = 1e-9, max_iters: int = 500
) -> Solution:
    """Both tasks divisible, users transmit in turn.

    For a fixed handover time the two rate problems separate and each is
    solved exactly, so the search is a refined line scan over the handover
    instead of a multivariate descent.  The all-offload TDMA schedule, when
    feasible, is one of the scanned candidates, keeping this solver at or
    below the indivisible energy.
    """
    p = partial_params(scenario)
    h_hi = p.lbar1 / p.ts

    def total(h: float) -> float:
        e1, _ = _capped_branch(p, h)
        return e1 + _stretched_branch(p, 2, p.lbar2 - h * p.ts, p.b2)[0]

    extra = []
    if p.cap1 > 0.0:
        extra.append(p.b1 / p.cap1)
    if p.dc2 > 0.0:
        extra.append((p.lbar2 - p.dc2 * p.b2) / p.ts)
    anchor = _binary_anchor(scenario, solve_tdma)
    if anchor is not None:
        extra.append(anchor.allocation.tau[1])
    h, _ = _refine_line(total, 0.0, h_hi, extra)
    _, r1 = _capped_branch(p, h)
    if r1 <= 0.0:
        h = 0.0
    r2 = _stretched_branch(p, 2, p.lbar2 - h * p.ts, p.b2)[1]
    return _assemble_tdma_partial(p, (r1, r2, h), PARTIAL, "partial-tdma")


def _assemble_tdma_partial(
    p: PartialParams, x, mode: str, trace: str, e1_extra: float = 0.0
) -> Solution:
    total, tau2, tau3, g1, g2, e1, e2 = _tdma_partial_detail(p, x)
    r1, r2 = x[0], x[1]
    alloc = Allocation(
        tau=(0.0, tau2, tau3),
        R12=r1 if g1 > 0.0 else 0.0,
        R23=r2 if g2 > 0.0 else 0.0,
        P12=min(_expm1_2(r1) / p.a1, p.pb1) if g1 > 0.0 else 0.0,
        P23=min(_expm1_2(r2) / p.a2, p.pb2) if g2 > 0.0 else 0.0,
        gamma11=g1,
        gamma23=g2,
    )
    return Solution(
        scheme=TDMA,
        mode=mode,
        feasible=True,
        symbol_interval=p.ts,
        allocation=alloc,
        energy1=e1 + p.local1((1.0 - g1) * p.b1) + e1_extra,
        energy2=e2 + p.local2((1.0 - g2) * p.b2),
        case_trace=trace,
    )


# ---------------------------------------------------------------------------
# one user alone, divisible task


def solve_partial_single_user(
    bits: float,
    latency: float,
    lbar: float,
    alpha: float,
    power_budget: float,
    symbol_interval: float,
    chip_constant: float,
    cloud_time_per_bit: float = 0.0,
    *,
    user: int = 1,
) -> Solution:
    """Single divisible task: 1-D search over the uplink rate.

    The offloaded fraction is recovered from tight latency; rate 0 is the
    all-local point, so this is always feasible.
    """
    ts = symbol_interval
    cap = log2_1p(alpha * power_budget)
    loc_scale = chip_constant / (latency**2 * ts)

    def detail(r: float):
        if r <= 0.0:
            return (loc_scale * bits**3, 0.0, 0.0, 0.0)
        g = min(1.0, lbar / (bits * (ts / r + cloud_time_per_bit)))
        air = g * bits / r
        p = _expm1_2(r) / alpha
        return (air * p + loc_scale * ((1.0 - g) * bits) ** 3, g, air, p)

    if lbar / bits > cloud_time_per_bit:
        r_full = ts / (lbar / bits - cloud_time_per_bit)
    else:
        r_full = math.inf

    def objective(x) -> float:
        return detail(x[0])[0]

    report = multi_start_descent(
        objective,
        [lambda x: _pieces_with_breaks(0.0, cap, (r_full,))],
        [(0.5 * cap,), (0.0,)],
        shapes=QUASICONVEX,
    )
    total, g, air, power = detail(report.point[0])
    r = report.point[0] if g > 0.0 else 0.0
    if user == 1:
        alloc = Allocation(tau=(0.0, air, 0.0), R12=r, P12=power if g > 0 else 0.0, gamma11=g)
        e1, e2 = total, 0.0
    else:
        alloc = Allocation(tau=(0.0, 0.0, air), R23=r, P23=power if g > 0 else 0.0, gamma23=g)
        e1, e2 = 0.0, total
    return Solution(
        scheme="single",
        mode=PARTIAL,
        feasible=True,
        symbol_interval=ts,
        allocation=alloc,
        energy1=e1,
        energy2=e2,
        case_trace=f"single-partial-{user}",
    )


# ---------------------------------------------------------------------------
# mixed: one task indivisible, the other divisible


def _binary_local_energy(scenario: Scenario, user: int) -> float | None:
    """Energy to run an indivisible task fully on the device, normalized."""
    task = scenario.user1 if user == 1 else scenario.user2
    if task.local_energy is not None:
        return task.local_energy / scenario.symbol_interval
    if task.local_model is not None:
        return task.local_model.chip_constant * task.bits**3 / (
            task.latency**2 * scenario.symbol_interval
        )
    return None


def _mixed_u1_binary_fullma(
    p: PartialParams, rel_tol: float, max_iters: int, seed=None
):
    """User 1 offloads everything: its rate and the slot length are pinned by
    tight latency, leaving a 2-D search over user 2's rates."""
    if p.lbar1 <= p.dc1 * p.b1:
        return None
    r11 = p.b1 * p.ts / (p.lbar1 - p.dc1 * p.b1)
    if r11 > p.cap1 * (1.0 + 1e-9):
        return None
    tau1 = p.b1 / r11

    def objective(x) -> float:
        d = _fullma_partial_detail(p, (r11, x[0], x[1]))
        return math.inf if d is None else d[0]

    def r21_gen(x):
        hi = min(p.cap2, p.sum_cap - r11)
        if hi < 0.0:
            return []
        return _pieces_with_breaks(0.0, hi)

    def r23_gen(x):
        return _pieces_with_breaks(0.0, p.cap2)

    hi21 = max(0.0, min(p.cap2, p.sum_cap - r11))
    inits = [
        (0.25 * hi21, 0.5 * p.cap2),
        (0.0, 0.0),
        (0.6 * hi21, 0.9 * p.cap2),
    ] + _lattice_seeds(objective, [(0.0, hi21), (0.0, p.cap2)], n=16)
    if seed is not None:
        inits.append(seed)
    report = _staged_descent(objective, [r21_gen, r23_gen], inits, rel_tol, max_iters)
    if report is None:
        return None
    return (r11, report.point)


def _mixed_u2_binary_fullma_detail(p: PartialParams, x, tol: float = 1e-9):
    """User 2 offloads everything; user 1 splits.  Slot-3 rate is recovered
    from user 2's tight latency."""
    r11, r21 = x
    if r11 < 0.0 or r21 < 0.0:
        return None
    tau1 = p.lbar1 / (p.ts + p.dc1 * r11)
    if r11 > 0.0:
        tau1 = min(tau1, p.b1 / r11)
    sent1 = min(tau1 * r11, p.b1)
    sent21 = min(tau1 * r21, p.b2)
    air21 = sent21 / r21 if r21 > 0.0 else 0.0
    rem = p.b2 - sent21
    if rem > tol * p.b2:
        air3_budget = (p.lbar2 - tau1 * p.ts - p.dc2 * p.b2) / p.ts
        if air3_budget <= 0.0:
            return None
        r23 = rem / air3_budget
        if r23 > p.cap2 * (1.0 + tol):
            return None
        tau3 = air3_budget
        p23 = min(_expm1_2(r23) / p.a2, p.pb2)
    else:
        rem = 0.0
        r23 = 0.0
        tau3 = 0.0
        p23 = 0.0
    if r11 > 0.0 or r21 > 0.0:
        powers = slot1_min_powers(p.a1, p.a2, p.pb1, p.pb2, r11, r21, tol)
        if powers is None:
            return None
        p11, p21, _ = powers
    else:
        p11 = p21 = 0.0
    e_loc1 = p.local1(p.b1 - sent1)
    total = tau1 * p11 + air21 * p21 + tau3 * p23 + e_loc1
    return (total, tau1, sent1, air21, sent21, tau3, rem, r23, p11, p21, p23, e_loc1)


def _mixed_u2_binary_fullma(
    p: PartialParams, rel_tol: float, max_iters: int, seed=None
):
    def objective(x) -> float:
        d = _mixed_u2_binary_fullma_detail(p, x)
        return math.inf if d is None else d[0]

    if p.lbar1 > p.dc1 * p.b1:
        r11_full = p.b1 * p.ts / (p.lbar1 - p.dc1 * p.b1)
    else:
        r11_full = math.inf

    def r11_gen(x):
        hi = min(p.cap1, p.sum_cap - x[1])
        if hi < 0.0:
            return []
        return _pieces_with_breaks(0.0, hi, (r11_full,), n=8)

    def r21_gen(x):
        hi = min(p.cap2, p.sum_cap - x[0])
        if hi < 0.0:
            return []
        return _pieces_with_breaks(0.0, hi, n=8)

    inits = [
        (0.3 * p.cap1, 0.5 * min(p.cap2, p.sum_cap - 0.3 * p.cap1)),
        (0.0, 0.8 * p.cap2),
        (0.0, 0.0),
    ] + _lattice_seeds(objective, [(0.0, p.cap1), (0.0, p.cap2)], n=16)
    if seed is not None:
        inits.append(seed)
    return multi_start_descent(
        objective,
        [r11_gen, r21_gen],
        inits,
        shapes=QUASICONVEX,
        rel_tol=rel_tol,
        max_iters=max_iters,
    )


def _mixed_u1_binary_tdma(p: PartialParams, anchor_r1: float | None):
    """User 1 sends all its bits in its own slot: exact 1-D over its rate,
    with user 2's stretched-branch optimum solved inside."""
    if p.lbar1 <= p.dc1 * p.b1:
        return None
    r1_min = p.b1 * p.ts / (p.lbar1 - p.dc1 * p.b1)
    if r1_min > p.cap1 * (1.0 + 1e-9):
        return None
    lo = min(r1_min, p.cap1)

    def total(r1: float) -> float:
        e1 = (p.b1 / r1) * _expm1_2(r1) / p.a1
        return e1 + _stretched_branch(p, 2, p.lbar2 - (p.b1 / r1) * p.ts, p.b2)[0]

    extra = [] if anchor_r1 is None else [anchor_r1]
    r1, _ = _refine_line(total, lo, p.cap1, extra)
    r2 = _stretched_branch(p, 2, p.lbar2 - (p.b1 / r1) * p.ts, p.b2)[1]
    return (r1, r2)


def _mixed_u2_binary_tdma_detail(p: PartialParams, x, tol: float = 1e-9):
    # x = (R1, t2), same slot-length parametrization as _tdma_partial_detail
    r1, t2 = x
    if r1 < 0.0 or t2 < 0.0:
        return None
    if r1 > 0.0 and t2 > 0.0:
        air1 = _user1_air(p, r1, t2)
        g1 = min(1.0, air1 * r1 / p.b1)
        e1 = air1 * _expm1_2(r1) / p.a1
    else:
        air1, g1, e1 = 0.0, 0.0, 0.0
    denom = p.lbar2 - air1 * p.ts - p.dc2 * p.b2
    if denom <= 0.0:
        return None
    r2 = p.b2 * p.ts / denom
    if r2 > p.cap2 * (1.0 + tol):
        return None
    tau3 = p.b2 / r2
    e2 = tau3 * _expm1_2(r2) / p.a2
    total = e1 + e2 + p.local1((1.0 - g1) * p.b1)
    return (total, air1, tau3, g1, r2, e1, e2)


def _mixed_u2_binary_tdma(p: PartialParams, anchor_h: float | None):
    """User 2 offloads everything: the handover pins its slowest feasible
    rate, leaving an exact 1-D problem in the handover time."""
    if _forced_rate2(p, 0.0) is None:
        return None
    h_hi = min(p.lbar1, p.lbar2 - p.dc2 * p.b2) / p.ts

    def total(h: float) -> float:
        r2 = _forced_rate2(p, h)
        if r2 is None:
            return math.inf
        e1, _ = _capped_branch(p, h)
        return e1 + (p.b2 / r2) * _expm1_2(r2) / p.a2

    extra = []
    if p.cap1 > 0.0:
        extra.append(p.b1 / p.cap1)
    if anchor_h is not None:
        extra.append(anchor_h)
    h, v = _refine_line(total, 0.0, h_hi, extra)
    if not math.isfinite(v):
        return None
    _, r1 = _capped_branch(p, h)
    if r1 <= 0.0:
        h = 0.0
    return (r1, h)


def solve_mixed(
    scenario: Scenario,
    which_user_binary: int,
    scheme: str = FULL_MA,
    rel_tol: float = 1e-9,
    max_iters: int = 500,
) -> Solution:
    """One task indivisible (offload all of it or none), the other divisible.

    Compares the offload branch of the requested scheme with keeping the
    indivisible task local while the other user splits alone.  Infeasible
    only when the indivisible task can neither be offloaded in time nor run
    locally.
    """
    if which_user_binary not in (1, 2):
        raise InvalidParameterError("which_user_binary must be 1 or 2")
    if scheme not in (FULL_MA, TDMA):
        raise InvalidParameterError(f"mixed mode supports fullma and tdma, not {scheme!r}")
    need1 = which_user_binary == 2
    need2 = which_user_binary == 1
    p = partial_params(scenario, need_local1=need1, need_local2=need2)
    candidates: list[tuple[float, Solution]] = []

    if which_user_binary == 1:
        if scheme == FULL_MA:
            anchor = _binary_anchor(scenario, solve_full_ma)
            seed = None
            if anchor is not None:
                seed = (anchor.allocation.R21, anchor.allocation.R23)
            res = _mixed_u1_binary_fullma(p, rel_tol, max_iters, seed)
            if res is not None:
                r11, (r21, r23) = res
                sol = _assemble_fullma_partial(
                    p, (r11, r21, r23), MIXED, "mixed-u1-binary-fullma"
                )
                candidates.append((sol.total_energy, sol))
        else:
            anchor = _binary_anchor(scenario, solve_tdma)
            res = _mixed_u1_binary_tdma(
                p, None if anchor is None else anchor.allocation.R12
            )
            if res is not None:
                sol = _assemble_tdma_partial(
                    p,
                    (res[0], res[1], p.b1 / res[0]),
                    MIXED,
                    "mixed-u1-binary-tdma",
                )
                candidates.append((sol.total_energy, sol))
        local = _binary_local_energy(scenario, 1)
        if local is not None:
            other = solve_partial_single_user(
                p.b2, p.l2, p.lbar2, p.a2, p.pb2, p.ts, p.m2, p.dc2, user=2
            )
            sol = Solution(
                scheme=scheme,
                mode=MIXED,
                feasible=True,
                symbol_interval=p.ts,
                allocation=other.allocation,
                energy1=local,
                energy2=other.energy2,
                case_trace="mixed-u1-local",
            )
            candidates.append((sol.total_energy, sol))
    else:
        if scheme == FULL_MA:
            anchor = _binary_anchor(scenario, solve_full_ma)
            seed = None
            if anchor is not None:
                seed = (anchor.allocation.R11, anchor.allocation.R21)
            report = _mixed_u2_binary_fullma(p, rel_tol, max_iters, seed)
            if report is not None:
                sol = _assemble_mixed_u2_fullma(p, report.point)
                candidates.append((sol.total_energy, sol))
        else:
            anchor = _binary_anchor(scenario, solve_tdma)
            res = _mixed_u2_binary_tdma(
                p, None if anchor is None else anchor.allocation.tau[1]
            )
            if res is not None:
                sol = _assemble_mixed_u2_tdma(p, res)
                candidates.append((sol.total_energy, sol))
        local = _binary_local_energy(scenario, 2)
        if local is not None:
            other = solve_partial_single_user(
                p.b1, p.l1, p.lbar1, p.a1, p.pb1, p.ts, p.m1, p.dc1, user=1
            )
            sol = Solution(
                scheme=scheme,
                mode=MIXED,
                feasible=True,
                symbol_interval=p.ts,
                allocation=other.allocation,
                energy1=other.energy1,
                energy2=local,
                case_trace="mixed-u2-local",
            )
            candidates.append((sol.total_energy, sol))

    if not candidates:
        return infeasible_solution(
            scheme, MIXED, p.ts, "indivisible task can neither offload nor run locally"
        )
    candidates.sort(key=lambda c: c[0])
    return candidates[0][1]


def _assemble_mixed_u2_fullma(p: PartialParams, x) -> Solution:
    d = _mixed_u2_binary_fullma_detail(p, x)
    total, tau1, sent1, air21, sent21, tau3, rem, r23, p11, p21, p23, el1 = d
    r11, r21 = x
    alloc = Allocation(
        tau=(tau1, 0.0, tau3),
        R11=r11 if sent1 > 0.0 else 0.0,
        R21=r21 if sent21 > 0.0 else 0.0,
        R23=r23,
        P11=p11,
        P21=p21,
        P23=p23,
        gamma11=min(1.0, sent1 / p.b1),
        gamma21=min(1.0, sent21 / p.b2),
        gamma23=min(1.0, rem / p.b2),
    )
    return Solution(
        scheme=FULL_MA,
        mode=MIXED,
        feasible=True,
        symbol_interval=p.ts,
        allocation=alloc,
        energy1=tau1 * p11 + el1,
        energy2=air21 * p21 + tau3 * p23,
        case_trace="mixed-u2-binary-fullma",
    )


def _assemble_mixed_u2_tdma(p: PartialParams, x) -> Solution:
    total, tau2, tau3, g1, r2, e1, e2 = _mixed_u2_binary_tdma_detail(p, x)
    r1 = x[0]
    alloc = Allocation(
        tau=(0.0, tau2, tau3),
        R12=r1 if g1 > 0.0 else 0.0,
        R23=r2,
        P12=min(_expm1_2(r1) / p.a1, p.pb1) if g1 > 0.0 else 0.0,
        P23=min(_expm1_2(r2) / p.a2, p.pb2),
        gamma11=g1,
        gamma23=1.0,
    )
    return Solution(
        scheme=TDMA,
        mode=MIXED,
        feasible=True,
        symbol_interval=p.ts,
        allocation=alloc,
        energy1=e1 + p.local1((1.0 - g1) * p.b1),
        energy2=e2,
        case_trace="mixed-u2-binary-tdma",
    )


def solve_partial(scenario: Scenario, scheme: str, **kwargs) -> Solution:
    """Dispatch for the divisible-task solvers."""
    if scheme == FULL_MA:
        return solve_partial_full_ma(scenario, **kwargs)
    if scheme == TDMA:
        return solve_partial_tdma(scenario, **kwargs)
    raise InvalidParameterError(f"partial mode supports fullma and tdma, not {scheme!r}")
