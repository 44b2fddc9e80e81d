"""Acceptance gate: one test per criterion, each emitting a pass/fail line.

Pools are seeded random scenarios kept away from feasibility boundaries,
solved analytically and cross-checked against the independent grid oracle.
Criteria with a stated wall-time budget assert their own elapsed time.
Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines live.
"""

import dataclasses
import math
import random
import time

import pytest

from macoff import (
    FULL_MA,
    ID,
    MIXED,
    PARTIAL,
    SCHEMES,
    SDWTS,
    TDMA,
    oracle_solve,
    region_member,
    solve_binary,
    solve_full_ma,
    solve_mixed,
    solve_partial,
    solve_partial_full_ma,
    solve_partial_tdma,
    solve_tdma,
)
from macoff.model import log2_1p, pow2
from macoff.partial_offload import partial_params
from macoff.simlab import load_config, run_montecarlo, run_sweep, sample_channel, solve_one, trial_rng

from conftest import binary_pool, partial_pool, random_equal_gain_scenario, rel_gap

REL_SLACK = 1e-9


def report(num: int, ok: bool, detail: str) -> None:
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line, flush=True)
    assert ok, line


@pytest.fixture(scope="module")
def binary_pools():
    return {s: binary_pool(s, 200, seed=4200 + i) for i, s in enumerate(SCHEMES)}


@pytest.fixture(scope="module")
def mixed_pool():
    return partial_pool(100, seed=777, with_binary_local=True)


@pytest.fixture(scope="module")
def equal_gain_pool():
    """Equal-gain scenarios whose joint-slot optimizers stay inside the
    smaller power budget, the premise under which TDMA loses nothing."""
    rng = random.Random(5150)
    pool = []
    while len(pool) < 100:
        sc = random_equal_gain_scenario(rng)
        budget = min(sc.link1.power_budget, sc.link2.power_budget)
        bsol = solve_full_ma(sc)
        if not bsol.feasible or bsol.allocation.P11 + bsol.allocation.P21 > budget:
            continue
        psol = solve_partial_full_ma(sc, rel_tol=1e-14)
        if not psol.feasible or psol.allocation.P11 + psol.allocation.P21 > budget:
            continue
        pool.append((sc, bsol, psol))
    return pool


def test_criterion_01_binary_oracle_equivalence(binary_pools):
    t0 = time.perf_counter()
    worst = {}
    mismatches = 0
    checked = 0
    for scheme, (feasible, infeasible) in binary_pools.items():
        w = 0.0
        for sc in feasible:
            sol = solve_binary(sc, scheme)
            ref = oracle_solve(sc, scheme)
            checked += 1
            if not (sol.feasible and ref.feasible):
                mismatches += 1
                continue
            w = max(w, rel_gap(sol.total_energy, ref.energy))
        for sc in infeasible:
            sol = solve_binary(sc, scheme)
            ref = oracle_solve(sc, scheme)
            checked += 1
            if sol.feasible or ref.feasible:
                mismatches += 1
        worst[scheme] = w
    elapsed = time.perf_counter() - t0
    ok = max(worst.values()) <= 1e-3 and mismatches == 0 and elapsed < 120.0
    gaps = ", ".join(f"{s} {worst[s]:.2e}" for s in SCHEMES)
    report(1, ok, f"worst rel {gaps}; {mismatches}/{checked} verdict mismatches; {elapsed:.0f}s")


def test_criterion_02_partial_mixed_oracle_equivalence(mixed_pool):
    jobs = [
        ("partial-fullma", lambda s: solve_partial(s, FULL_MA), dict(mode=PARTIAL)),
        ("partial-tdma", lambda s: solve_partial(s, TDMA), dict(mode=PARTIAL)),
        ("mixed-u1-fullma", lambda s: solve_mixed(s, 1, FULL_MA), dict(mode=MIXED, which_user_binary=1)),
        ("mixed-u1-tdma", lambda s: solve_mixed(s, 1, TDMA), dict(mode=MIXED, which_user_binary=1)),
        ("mixed-u2-fullma", lambda s: solve_mixed(s, 2, FULL_MA), dict(mode=MIXED, which_user_binary=2)),
        ("mixed-u2-tdma", lambda s: solve_mixed(s, 2, TDMA), dict(mode=MIXED, which_user_binary=2)),
    ]
    schemes = {"fullma": FULL_MA, "tdma": TDMA}
    t0 = time.perf_counter()
    worst = {}
    mismatches = 0
    for name, solver, kwargs in jobs:
        scheme = schemes[name.rsplit("-", 1)[1]]
        w = 0.0
        for sc in mixed_pool:
            sol = solver(sc)
            ref = oracle_solve(sc, scheme, **kwargs)
            if sol.feasible != ref.feasible:
                mismatches += 1
                continue
            if sol.feasible:
                w = max(w, rel_gap(sol.total_energy, ref.energy))
        worst[name] = w
    elapsed = time.perf_counter() - t0
    ok = max(worst.values()) <= 1e-2 and mismatches == 0 and elapsed < 180.0
    gaps = ", ".join(f"{n} {w:.1e}" for n, w in worst.items())
    report(2, ok, f"worst rel {gaps}; {mismatches} verdict mismatches; {elapsed:.0f}s")


def test_criterion_03_scheme_dominance(binary_pools):
    pairs = ((FULL_MA, SDWTS), (SDWTS, ID), (FULL_MA, TDMA))
    compared = 0
    violations = []
    for scheme in SCHEMES:
        for sc in binary_pools[scheme][0]:
            sols = {s: solve_binary(sc, s) for s in SCHEMES}
            energy = {s: sols[s].total_energy for s in SCHEMES if sols[s].feasible}
            if energy and FULL_MA not in energy:
                violations.append((scheme, "full MA infeasible while a subset scheme is not"))
                continue
            for better, worse in pairs:
                if better in energy and worse in energy:
                    compared += 1
                    if energy[better] > energy[worse] * (1.0 + REL_SLACK):
                        violations.append((scheme, f"{better} above {worse}"))
    report(3, not violations, f"{compared} ordered pairs, {len(violations)} violations")


def test_criterion_04_id_matches_tdma(binary_pools):
    worst = 0.0
    broken = 0
    for sc in binary_pools[TDMA][0][:100]:
        tdma = solve_tdma(sc)
        ident = solve_binary(sc, ID)
        if not (tdma.feasible and ident.feasible):
            broken += 1
            continue
        worst = max(worst, abs(ident.total_energy - tdma.total_energy) / tdma.total_energy)
    ok = worst <= 1e-6 and broken == 0
    report(4, ok, f"worst |E_ID - E_TDMA|/E_TDMA = {worst:.2e} over 100 scenarios")


def test_criterion_05_equal_gain_tdma_optimal(equal_gain_pool):
    worst_binary = worst_partial = worst_gamma = 0.0
    broken = 0
    for sc, bsol, psol in equal_gain_pool:
        bt = solve_tdma(sc)
        pt = solve_partial_tdma(sc, rel_tol=1e-14)
        if not (bt.feasible and pt.feasible):
            broken += 1
            continue
        worst_binary = max(
            worst_binary, abs(bt.total_energy - bsol.total_energy) / bsol.total_energy
        )
        worst_partial = max(
            worst_partial, abs(pt.total_energy - psol.total_energy) / psol.total_energy
        )
        g1 = abs(pt.allocation.gamma11 - psol.allocation.gamma11)
        g2 = abs(
            (pt.allocation.gamma21 + pt.allocation.gamma23)
            - (psol.allocation.gamma21 + psol.allocation.gamma23)
        )
        worst_gamma = max(worst_gamma, g1, g2)
    ok = worst_binary <= 1e-6 and worst_partial <= 1e-6 and worst_gamma <= 1e-6 and broken == 0
    report(
        5,
        ok,
        f"binary gap {worst_binary:.2e}, partial gap {worst_partial:.2e},"
        f" fraction gap {worst_gamma:.2e} over 100 equal-gain scenarios",
    )


def _series(rows, scheme, mode):
    return [r for r in rows if r.scheme == scheme and r.mode == mode]


def _non_increasing(values, slack=REL_SLACK):
    return all(b <= a * (1.0 + slack) + 1e-15 for a, b in zip(values, values[1:]))


def test_criterion_06_gain_sweep_onsets_and_coincidence():
    t0 = time.perf_counter()
    rows = run_sweep(load_config("fig4"))
    onset = {}
    monotone = {}
    for scheme in SCHEMES:
        series = _series(rows, scheme, "binary")
        feas = [r for r in series if r.feasible]
        assert feas, f"{scheme} never becomes feasible on the gain grid"
        onset[scheme] = min(r.sweep_value for r in feas)
        monotone[scheme] = _non_increasing([r.energy_total_norm for r in feas])
    ordered = onset[FULL_MA] <= onset[SDWTS] <= onset[ID] <= onset[TDMA]

    full = {r.sweep_value: r for r in _series(rows, FULL_MA, "binary") if r.feasible}
    seq = {r.sweep_value: r for r in _series(rows, SDWTS, "binary") if r.feasible}
    offenders = []
    for v in sorted(set(full) & set(seq)):
        gap = rel_gap(seq[v].energy_total_norm, full[v].energy_total_norm)
        if gap > 1e-3:
            offenders.append(f"h1_sq={v:.2f} gap={gap:.1e}")
    elapsed = time.perf_counter() - t0
    ok = ordered and all(monotone.values()) and not offenders and elapsed < 30.0
    onsets = ", ".join(f"{s} {onset[s]:.2f}" for s in SCHEMES)
    detail = f"onsets {onsets}; {elapsed:.1f}s"
    if offenders:
        detail += "; full-MA/sequential curves split at " + ", ".join(offenders)
    report(6, ok, detail)


def test_criterion_07_latency_sweep_monotone():
    rows = run_sweep(load_config("fig6"))
    monotone = {}
    for scheme in SCHEMES:
        series = [r for r in _series(rows, scheme, "binary") if r.feasible]
        assert len(series) == len(_series(rows, scheme, "binary")), f"{scheme} infeasible points"
        monotone[scheme] = _non_increasing([r.energy_total_norm for r in series])
    full = [r.energy_total_norm for r in _series(rows, FULL_MA, "binary")]
    td = [r.energy_total_norm for r in _series(rows, TDMA, "binary")]
    gaps = [t - f for f, t in zip(full, td)]
    gap_monotone = _non_increasing(gaps, slack=1e-9)
    ok = all(monotone.values()) and gap_monotone
    report(
        7,
        ok,
        f"all schemes non-increasing in L2: {all(monotone.values())};"
        f" TDMA-full MA gap {gaps[0]:.3f} -> {gaps[-1]:.3f} non-increasing: {gap_monotone}",
    )


def test_criterion_08_divisibility_sweep():
    t0 = time.perf_counter()
    spec = load_config("fig7-8")
    rows = run_sweep(spec)
    h2 = spec.template.user2.h_sq
    worst_excess = -math.inf
    meet = {}
    gamma_ok = {}
    crossover = True
    for scheme in (FULL_MA, TDMA):
        binary = _series(rows, scheme, "binary")
        part = _series(rows, scheme, "partial")
        for rb, rp in zip(binary, part):
            assert rp.feasible, f"partial {scheme} infeasible at {rp.sweep_value}"
            if rb.feasible:
                worst_excess = max(
                    worst_excess,
                    (rp.energy_total_norm - rb.energy_total_norm) / rb.energy_total_norm,
                )
        gamma_ok[scheme] = all(
            b.gamma11 <= a.gamma11 + 1e-9 for b, a in zip(part, part[1:])
        )
    for mode in ("binary", "partial"):
        full = {r.sweep_value: r for r in _series(rows, FULL_MA, mode)}
        td = {r.sweep_value: r for r in _series(rows, TDMA, mode)}
        (at_equal,) = [v for v in full if math.isclose(v, h2)]
        meet[mode] = rel_gap(td[at_equal].energy_total_norm, full[at_equal].energy_total_norm)
        for v in full:
            if v >= 5.0 * h2 - 1e-12 and mode == "binary":
                crossover &= full[v].energy_total_norm < td[v].energy_total_norm
    binary_five = {r.sweep_value: r for r in _series(rows, FULL_MA, "binary")}
    partial_five = {r.sweep_value: r for r in _series(rows, TDMA, "partial")}
    for v in binary_five:
        if v >= 5.0 * h2 - 1e-12:
            crossover &= (
                binary_five[v].energy_total_norm < partial_five[v].energy_total_norm
            )
    elapsed = time.perf_counter() - t0
    ok = (
        worst_excess <= REL_SLACK
        and max(meet.values()) <= 1e-6
        and crossover
        and all(gamma_ok.values())
    )
    report(
        8,
        ok,
        f"partial-over-binary excess {worst_excess:.1e}; equal-gain meet"
        f" binary {meet['binary']:.1e} partial {meet['partial']:.1e};"
        f" 5x crossover {crossover}; offload fraction monotone {all(gamma_ok.values())};"
        f" {elapsed:.0f}s",
    )


def test_criterion_09_fading_averages():
    t0 = time.perf_counter()
    spec = load_config("fig9-10")

    def means_of(mode, trials, d1):
        sub = dataclasses.replace(spec, modes=(mode,), trials=trials, d1=d1)
        return {(r["d1"], r["scheme"]): r["mean_energy_joules"] for r in run_montecarlo(sub)}

    def gap(mean, d):
        return (mean[(d, "tdma")] - mean[(d, "fullma")]) / mean[(d, "fullma")]

    binary = means_of("binary", 10000, spec.d1)
    ordered = all(binary[(d, "fullma")] <= binary[(d, "tdma")] * (1.0 + REL_SLACK) for d in spec.d1)
    closer_binary = gap(binary, 500.0) < gap(binary, 900.0)

    part = means_of("partial", 60, (500.0, 900.0))
    ordered_partial = all(
        part[(d, "fullma")] <= part[(d, "tdma")] * (1.0 + REL_SLACK) for d in (500.0, 900.0)
    )
    closer_partial = gap(part, 500.0) < gap(part, 900.0)

    worst_mixed = 0.0
    for k in range(50):
        h = sample_channel(spec.d2, spec.exponent, trial_rng(spec.seed, k))
        sc = spec.template.build(h1_sq=h, h2_sq=h)
        ef = solve_one(sc, "fullma", "mixed", spec.which_user_binary)
        et = solve_one(sc, "tdma", "mixed", spec.which_user_binary)
        assert ef.feasible and et.feasible
        worst_mixed = max(worst_mixed, rel_gap(et.total_energy, ef.total_energy))

    elapsed = time.perf_counter() - t0
    ok = (
        ordered
        and closer_binary
        and ordered_partial
        and closer_partial
        and worst_mixed <= 1e-6
        and elapsed < 180.0
    )
    report(
        9,
        ok,
        f"full MA below TDMA at every distance: {ordered and ordered_partial};"
        f" gap 500 m {gap(binary, 500.0):.3f} < 900 m {gap(binary, 900.0):.3f}: {closer_binary};"
        f" equal-gain mixed gap {worst_mixed:.1e}; {elapsed:.0f}s",
    )


def _midpoint_convex(fn, lo, hi, rng, pairs=50):
    for _ in range(pairs):
        a, b = sorted((rng.uniform(lo, hi), rng.uniform(lo, hi)))
        if fn((a + b) / 2.0) > (fn(a) + fn(b)) / 2.0 + 1e-9 * (1.0 + abs(fn(a))):
            return False
    return True


def test_criterion_10_property_suites():
    rng = random.Random(1010)

    # per-bit energy premium (2^R - 1)/R grows with the rate
    points = sorted(rng.uniform(1e-9, 30.0) for _ in range(100))
    premium = [(2.0**r - 1.0) / r for r in points]
    increasing = all(a < b for a, b in zip(premium, premium[1:]))

    # midpoint convexity of both reduced one-variable objectives
    def joint_slot_energy(r21, b1=2.0, b2=6.0, lt1=2.0, lt2=4.0):
        # user 2 pays the interference premium in slot 1, then finishes alone
        r23 = (b2 - lt1 * r21) / (lt2 - lt1)
        p11 = 2.0 ** (b1 / lt1) - 1.0
        p21 = 2.0 ** (b1 / lt1) * (2.0**r21 - 1.0)
        return lt1 * (p11 + p21) + (lt2 - lt1) * (2.0**r23 - 1.0)

    def turn_taking_energy(r1, b1=2.0, b2=2.0, lt1=2.0, lt2=4.0):
        r2 = b2 * r1 / (lt2 * r1 - b1)
        return (b1 / r1) * (2.0**r1 - 1.0) + (lt2 - b1 / r1) * (2.0**r2 - 1.0)

    convex = _midpoint_convex(joint_slot_energy, 0.0, 3.0, rng) and _midpoint_convex(
        turn_taking_energy, 1.0, 3.0, rng
    )

    # coordinate slices of the three-rate divisible objective never bulge up
    # inside the feasible tube (fractions in [0, 1], nonnegative final slot,
    # corner powers within budget); outside it the cubic local terms are
    # meaningless and the solver masks those points anyway
    sc = partial_pool(1, seed=33)[0]
    p = partial_params(sc)
    caps = (p.cap1, p.cap2, p.cap2)

    def objective(x):
        r11, r21, r23 = x
        tau1 = p.lbar1 / (p.ts + p.dc1 * r11)
        off1 = tau1 * r11
        if off1 > p.b1 * (1.0 + 1e-12):
            return math.inf
        tau3 = (p.lbar2 - tau1 * (p.ts + p.dc2 * r21)) / (p.ts + p.dc2 * r23)
        if tau3 < 0.0:
            return math.inf
        off2 = tau1 * r21 + tau3 * r23
        if off2 > p.b2 * (1.0 + 1e-12):
            return math.inf
        p11 = (pow2(r11) - 1.0) / p.a1
        p21 = pow2(r11) * (pow2(r21) - 1.0) / p.a2
        p23 = (pow2(r23) - 1.0) / p.a2
        if p11 > p.pb1 or p21 > p.pb2 or p23 > p.pb2:
            return math.inf
        energy = tau1 * (p11 + p21) + tau3 * p23
        energy += p.m1 * (p.b1 - off1) ** 3 / (p.l1**2 * p.ts)
        energy += p.m2 * (p.b2 - off2) ** 3 / (p.l2**2 * p.ts)
        return energy

    bases = []
    while len(bases) < 20:
        x = tuple(rng.uniform(0.0, c) for c in caps)
        if math.isfinite(objective(x)):
            bases.append(x)
    quasiconvex = True
    for x in bases:
        for axis, cap in enumerate(caps):
            grid = [axis_value * cap / 199.0 for axis_value in range(200)]
            vals = [objective(tuple(g if i == axis else x[i] for i in range(3))) for g in grid]
            for i in range(1, 199):
                eps = 1e-9 * (1.0 + abs(vals[i]))
                if math.isfinite(vals[i]) and vals[i] > vals[i - 1] + eps and vals[i] > vals[i + 1] + eps:
                    quasiconvex = False

    # folding the middle slot into the joint slot keeps energy, bits and
    # decodability (the log is concave, so averaging powers only helps)
    merged_ok = True
    for _ in range(200):
        a1, a2 = rng.uniform(0.2, 5.0), rng.uniform(0.2, 5.0)
        p11, p21, p12 = (rng.uniform(0.0, 4.0) for _ in range(3))
        tau1, tau2 = rng.uniform(0.1, 5.0), rng.uniform(0.1, 5.0)
        r11 = rng.random() * log2_1p(a1 * p11)
        r21 = rng.random() * min(
            log2_1p(a2 * p21), log2_1p(a1 * p11 + a2 * p21) - r11
        )
        r12 = rng.random() * log2_1p(a1 * p12)
        span = tau1 + tau2
        merged_p1 = (tau1 * p11 + tau2 * p12) / span
        merged_p2 = tau1 * p21 / span
        merged_r1 = (tau1 * r11 + tau2 * r12) / span
        merged_r2 = tau1 * r21 / span
        if not region_member(FULL_MA, merged_r1, merged_r2, merged_p1, merged_p2, a1, a2):
            merged_ok = False
        if not math.isclose(span * merged_r1, tau1 * r11 + tau2 * r12, rel_tol=1e-12):
            merged_ok = False
        if not math.isclose(span * merged_p1 + span * merged_p2,
                            tau1 * (p11 + p21) + tau2 * p12, rel_tol=1e-12):
            merged_ok = False

    ok = increasing and convex and quasiconvex and merged_ok
    report(
        10,
        ok,
        f"rate premium increasing: {increasing}; reduced objectives convex: {convex};"
        f" slice quasi-convexity: {quasiconvex}; slot merge lossless: {merged_ok}",
    )
