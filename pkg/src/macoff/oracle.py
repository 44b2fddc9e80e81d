"""Brute-force grid reference for every solver.

Deliberately independent of the solver modules: energies and constraints are
re-derived here from the system model and evaluated on dense numpy grids with
iterative window shrinking.  Tests compare solver outputs against these
references, so nothing below imports solver code; only the shared domain
types are used.

The returned info carries cell widths and a local Lipschitz estimate around
the best cell, from which ``slack`` bounds how far below the true optimum a
grid minimum can sit.  A solver result more than that slack *below* the
oracle indicates a bug in one of the two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    BINARY,
    FULL_MA,
    ID,
    MIXED,
    PARTIAL,
    SDWTS,
    TDMA,
    InvalidParameterError,
    Scenario,
    log2_1p,
)

_INF = math.inf


def _quiet():
    # grid evaluation deliberately produces inf/nan in masked-off cells
    return np.errstate(over="ignore", invalid="ignore", divide="ignore")


@dataclass(frozen=True)
class GridSpec:
    """Grid resolution and refinement schedule.

    Each pass shrinks the search window to ``shrink`` times its width around
    the best cell, clipped to the original bounds.
    """

    points_low_dim: int = 400
    points_high_dim: int = 120
    passes: int = 3
    shrink: float = 0.1

    def __post_init__(self) -> None:
        if self.points_low_dim < 16 or self.points_high_dim < 16:
            raise InvalidParameterError("grid resolutions must be at least 16")
        if not 0.0 < self.shrink < 1.0:
            raise InvalidParameterError("shrink must be in (0, 1)")
        if self.passes < 1:
            raise InvalidParameterError("passes must be at least 1")

    def points(self, ndim: int) -> int:
        return self.points_low_dim if ndim <= 2 else self.points_high_dim


@dataclass(frozen=True)
class OracleResult:
    feasible: bool
    energy: float | None
    point: tuple | None
    info: dict


def _params(scenario: Scenario, mode: str) -> dict:
    s = scenario
    p = {
        "b1": s.user1.bits,
        "b2": s.user2.bits,
        "a1": s.alpha1,
        "a2": s.alpha2,
        "pb1": s.link1.power_budget,
        "pb2": s.link2.power_budget,
        "ts": s.symbol_interval,
        "cap1": log2_1p(s.alpha1 * s.link1.power_budget),
        "cap2": log2_1p(s.alpha2 * s.link2.power_budget),
    }
    if mode == BINARY:
        p["lt1"] = s.latency_budget(1, BINARY)
        p["lt2"] = s.latency_budget(2, BINARY)
    else:
        p["lbar1"] = s.latency_budget(1, PARTIAL)
        p["lbar2"] = s.latency_budget(2, PARTIAL)
        p["l1"] = s.user1.latency
        p["l2"] = s.user2.latency
        lm1, lm2 = s.user1.local_model, s.user2.local_model
        p["m1"] = lm1.chip_constant if lm1 else None
        p["m2"] = lm2.chip_constant if lm2 else None
        p["dc1"] = lm1.cloud_time_per_bit if lm1 else 0.0
        p["dc2"] = lm2.cloud_time_per_bit if lm2 else 0.0
    return p


def _refine(eval_grid, bounds, spec: GridSpec):
    """Multi-pass grid minimization; returns (energy, point, info) with
    energy inf when no grid point was feasible."""
    ndim = len(bounds)
    n = spec.points(ndim)
    orig = [tuple(b) for b in bounds]
    cur = [tuple(b) for b in bounds]
    best_e, best_x = _INF, None
    info = {"grid_points": n, "passes": spec.passes}
    for _ in range(spec.passes):
        axes = [np.linspace(lo, hi, n) if hi > lo else np.full(1, lo) for lo, hi in cur]
        with _quiet():
            grid = eval_grid(axes)
        flat = np.argmin(grid)
        e = float(grid.flat[flat])
        idx = np.unravel_index(flat, grid.shape)
        if not math.isfinite(e):
            break
        x = tuple(float(axes[k][idx[k]]) for k in range(ndim))
        if e < best_e:
            best_e, best_x = e, x
        widths = [(hi - lo) / max(1, len(axes[k]) - 1) for k, (lo, hi) in enumerate(cur)]
        lips = []
        for k in range(ndim):
            d = 0.0
            for step in (-1, 1):
                j = idx[k] + step
                if 0 <= j < grid.shape[k]:
                    sel = list(idx)
                    sel[k] = j
                    v = float(grid[tuple(sel)])
                    if math.isfinite(v):
                        d = max(d, abs(v - e))
            lips.append(d / widths[k] if widths[k] > 0 else 0.0)
        info["cell_widths"] = widths
        info["lipschitz"] = lips
        info["slack"] = 10.0 * sum(l * w for l, w in zip(lips, widths)) + 1e-12
        nxt = []
        for k, (lo, hi) in enumerate(cur):
            half = spec.shrink * (hi - lo) / 2.0
            c = x[k]
            nxt.append(
                (max(orig[k][0], c - half), min(orig[k][1], c + half))
            )
        cur = nxt
    info.setdefault("slack", 1e-12)
    return best_e, best_x, info


def _exp2m1(x):
    return np.exp2(np.minimum(x, 1020.0)) - 1.0


def _min_powers_grid(a1, a2, pb1, pb2, R11, R21, tol=1e-9):
    """Vectorized cheapest joint-decoding powers; inf sum where unsupportable."""
    with _quiet():
        return _min_powers_grid_impl(a1, a2, pb1, pb2, R11, R21, tol)


def _min_powers_grid_impl(a1, a2, pb1, pb2, R11, R21, tol):
    q1 = np.exp2(np.minimum(R11, 1020.0))
    q2 = np.exp2(np.minimum(R21, 1020.0))
    qs = q1 * q2
    cand11 = [(q1 - 1.0) / a1, q2 * (q1 - 1.0) / a1,
              np.full_like(qs, pb1), (qs - 1.0 - a2 * pb2) / a1]
    cand21 = [q1 * (q2 - 1.0) / a2, (q2 - 1.0) / a2,
              (qs - 1.0 - a1 * pb1) / a2, np.full_like(qs, pb2)]
    rt = tol * (1.0 + R11 + R21)
    best_sum = np.full(np.broadcast(q1, q2).shape, _INF)
    best11 = np.zeros_like(best_sum)
    best21 = np.zeros_like(best_sum)
    for p11, p21 in zip(cand11, cand21):
        ok = (p11 >= -tol * pb1) & (p21 >= -tol * pb2)
        p11c = np.clip(p11, 0.0, pb1)
        p21c = np.clip(p21, 0.0, pb2)
        ok &= R11 <= np.log2(1.0 + a1 * p11c) + rt
        ok &= R21 <= np.log2(1.0 + a2 * p21c) + rt
        ok &= R11 + R21 <= np.log2(1.0 + a1 * p11c + a2 * p21c) + rt
        s = np.where(ok, p11c + p21c, _INF)
        better = s < best_sum
        best_sum = np.where(better, s, best_sum)
        best11 = np.where(better, p11c, best11)
        best21 = np.where(better, p21c, best21)
    return best_sum, best11, best21


# ---------------------------------------------------------------------------
# binary mode


def _oracle_fullma_binary(p, spec, tol=1e-9):
    r11 = p["b1"] / p["lt1"]
    if r11 > p["cap1"] + tol * (1.0 + r11):
        return _INF, None, {"slack": 1e-12}
    span3 = p["lt2"] - p["lt1"]
    lo = max(0.0, (p["b2"] - span3 * p["cap2"]) / p["lt1"])
    sum_cap = log2_1p(p["a1"] * p["pb1"] + p["a2"] * p["pb2"])
    hi = min(p["cap2"], sum_cap - r11, p["b2"] / p["lt1"])
    if lo > hi + tol * (1.0 + abs(lo)):
        return _INF, None, {"slack": 1e-12}
    hi = max(lo, hi)

    def ev(axes):
        r21 = axes[0]
        psum, _, _ = _min_powers_grid(p["a1"], p["a2"], p["pb1"], p["pb2"], r11, r21, tol)
        rem = p["b2"] - p["lt1"] * r21
        bad = rem < -tol * p["b2"]
        rem = np.clip(rem, 0.0, None)
        if span3 > 0.0:
            r23 = rem / span3
            e3 = np.where(
                r23 <= p["cap2"] * (1.0 + 1e-9), span3 * _exp2m1(r23) / p["a2"], _INF
            )
        else:
            e3 = np.where(rem <= tol * p["b2"], 0.0, _INF)
        return np.where(bad, _INF, p["lt1"] * psum + e3)

    return _refine(ev, [(lo, hi)], spec)


def _oracle_tdma_binary(p, spec, tol=1e-9):
    lo, hi = p["b1"] / p["lt1"], p["cap1"]
    if lo > hi * (1.0 + tol):
        return _INF, None, {"slack": 1e-12}
    hi = max(lo, hi)

    def ev(axes):
        r1 = np.maximum(axes[0], 1e-300)
        tau2 = p["b1"] / r1
        span = p["lt2"] - tau2
        with np.errstate(divide="ignore", invalid="ignore"):
            r2 = np.where(span > 0.0, p["b2"] / np.maximum(span, 1e-300), _INF)
        ok = (tau2 <= p["lt1"] * (1.0 + tol)) & (span > 0.0)
        ok &= r2 <= p["cap2"] * (1.0 + tol)
        e = tau2 * _exp2m1(r1) / p["a1"] + np.maximum(span, 0.0) * _exp2m1(r2) / p["a2"]
        return np.where(ok, e, _INF)

    return _refine(ev, [(lo, hi)], spec)


def _three_slot_tail(p, A, B, T, tol):
    """Solo-slot energies for joint-slot rates A, B and slot length T."""
    span3 = p["lt2"] - p["lt1"]
    rem1 = p["b1"] - T * A
    rem2 = p["b2"] - T * B
    ok = (rem1 >= -1e-9 * p["b1"]) & (rem2 >= -1e-9 * p["b2"])
    rem1 = np.clip(rem1, 0.0, None)
    rem2 = np.clip(rem2, 0.0, None)
    span2 = np.maximum(p["lt1"] - T, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        r12 = np.where(span2 > 0.0, rem1 / np.maximum(span2, 1e-300), _INF)
        r23 = rem2 / span3 if span3 > 0.0 else np.where(rem2 > 0.0, _INF, 0.0)
    need2 = rem1 > 1e-9 * p["b1"]
    need3 = rem2 > 1e-9 * p["b2"]
    ok &= np.where(need2, r12 <= p["cap1"] * (1.0 + 1e-9), True)
    ok &= np.where(need3, r23 <= p["cap2"] * (1.0 + 1e-9), True)
    e2 = np.where(need2, span2 * _exp2m1(np.where(need2, r12, 0.0)) / p["a1"], 0.0)
    e3 = np.where(need3, span3 * _exp2m1(np.where(need3, r23, 0.0)) / p["a2"], 0.0)
    return ok, e2, e3


def _req_curve(p, n=4097):
    """Rates forced by the solo-slot capacities along a dense tau sweep."""
    span3 = p["lt2"] - p["lt1"]
    tau = np.linspace(0.0, p["lt1"], n)
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = np.where(
            tau > 0.0,
            np.maximum(0.0, (p["b1"] - (p["lt1"] - tau) * p["cap1"]) / np.maximum(tau, 1e-300)),
            np.where(p["b1"] <= p["lt1"] * p["cap1"] * (1.0 + 1e-12), 0.0, _INF),
        )
        r2 = np.where(
            tau > 0.0,
            np.maximum(0.0, (p["b2"] - span3 * p["cap2"]) / np.maximum(tau, 1e-300)),
            np.where(p["b2"] <= span3 * p["cap2"] * (1.0 + 1e-12), 0.0, _INF),
        )
    return tau, r1, r2


def _curve_probe(p, powers_fn, tol):
    """Best energy along the requirement-rate curve; seeds the cube search."""
    with _quiet():
        tau, r1, r2 = _req_curve(p)
        ok0 = np.isfinite(r1) & np.isfinite(r2)
        r1s = np.where(ok0, r1, 0.0)
        r2s = np.where(ok0, r2, 0.0)
        p11, p21, okp = powers_fn(r1s, r2s)
        ok = ok0 & okp
        ok &= (p11 <= p["pb1"] * (1.0 + tol)) & (p21 <= p["pb2"] * (1.0 + tol))
        tails = _three_slot_tail(p, r1s, r2s, tau, tol)
        ok &= tails[0]
        e = tau * (p11 + p21) + tails[1] + tails[2]
        e = np.where(ok, e, _INF)
    i = int(np.argmin(e))
    if not math.isfinite(float(e[i])):
        return _INF, None
    return float(e[i]), (float(r1s[i]), float(r2s[i]), float(tau[i]))


def _sdwts_power_fns(p, order):
    def fn(A, B):
        if order == 1:
            p11 = _exp2m1(A) / p["a1"]
            p21 = np.exp2(np.minimum(A, 1020.0)) * _exp2m1(B) / p["a2"]
        else:
            p11 = np.exp2(np.minimum(B, 1020.0)) * _exp2m1(A) / p["a1"]
            p21 = _exp2m1(B) / p["a2"]
        return p11, p21, np.ones(np.broadcast(p11, p21).shape, dtype=bool)

    return fn


def _id_power_fn(p):
    def fn(A, B):
        s1 = np.exp2(np.minimum(A, 500.0))
        s2 = np.exp2(np.minimum(B, 500.0))
        d = s1 + s2 - s1 * s2
        ok = d > 1e-300
        dsafe = np.where(ok, d, 1.0)
        p11 = np.where(ok, s2 * (s1 - 1.0) / (p["a1"] * dsafe), _INF)
        p21 = np.where(ok, s1 * (s2 - 1.0) / (p["a2"] * dsafe), _INF)
        return p11, p21, ok

    return fn


def _req_at(p, T):
    """Vectorized requirement rates at slot lengths T (inf when unmeetable)."""
    span3 = p["lt2"] - p["lt1"]
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = np.where(
            T > 0.0,
            np.maximum(0.0, (p["b1"] - (p["lt1"] - T) * p["cap1"]) / np.maximum(T, 1e-300)),
            np.where(p["b1"] <= p["lt1"] * p["cap1"] * (1.0 + 1e-12), 0.0, _INF),
        )
        r2 = np.where(
            T > 0.0,
            np.maximum(0.0, (p["b2"] - span3 * p["cap2"]) / np.maximum(T, 1e-300)),
            np.where(p["b2"] <= span3 * p["cap2"] * (1.0 + 1e-12), 0.0, _INF),
        )
    return r1, r2


def _oracle_three_slot(p, spec, powers_fn, tol=1e-9):
    """The feasible rates live in [requirement(tau), cap]; gridding the
    normalized offset instead of the raw rate keeps that set axis-aligned, so
    window refinement can follow the narrow low-energy valley along tau."""
    probe_e, probe_x = _curve_probe(p, powers_fn, tol)

    def rates(U1, U2, T):
        q1, q2 = _req_at(p, T)
        ok = np.isfinite(q1) & np.isfinite(q2)
        q1 = np.where(ok, q1, 0.0)
        q2 = np.where(ok, q2, 0.0)
        A = q1 + U1 * np.maximum(p["cap1"] - q1, 0.0)
        B = q2 + U2 * np.maximum(p["cap2"] - q2, 0.0)
        return A, B, ok

    def ev(axes):
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            U1 = axes[0][:, None, None]
            U2 = axes[1][None, :, None]
            T = axes[2][None, None, :]
            A, B, ok = rates(U1, U2, T)
            p11, p21, okp = powers_fn(A, B)
            ok = ok & okp & (p11 <= p["pb1"] * (1.0 + tol)) & (p21 <= p["pb2"] * (1.0 + tol))
            tails = _three_slot_tail(p, A, B, T, tol)
            ok = ok & tails[0]
            e = T * (p11 + p21) + tails[1] + tails[2]
            return np.where(ok, e, _INF)

    bounds = [(0.0, 1.0), (0.0, 1.0), (0.0, p["lt1"])]
    e, x, info = _refine(ev, bounds, spec)
    if x is not None:
        u1, u2, t = x
        a, b, _ = rates(np.float64(u1), np.float64(u2), np.float64(t))
        x = (float(a), float(b), t)
    if probe_e < e:
        e, x = probe_e, probe_x
    return e, x, info


def _oracle_sdwts_binary(p, spec, tol=1e-9):
    best = (_INF, None, {"slack": 1e-12})
    for order in (1, 2):
        r = _oracle_three_slot(p, spec, _sdwts_power_fns(p, order), tol)
        if r[0] < best[0]:
            best = r
    t = _oracle_tdma_binary(p, spec, tol)
    if t[0] < best[0]:
        best = t if best[1] is None else (t[0], t[1], best[2])
    return best


def _oracle_id_binary(p, spec, tol=1e-9):
    best = _oracle_three_slot(p, spec, _id_power_fn(p), tol)
    t = _oracle_tdma_binary(p, spec, tol)
    if t[0] < best[0]:
        best = t if best[1] is None else (t[0], t[1], best[2])
    return best


# ---------------------------------------------------------------------------
# partial mode


def _loc(m, bits, latency, ts, btotal):
    return np.where(bits <= 1e-12 * btotal, 0.0, m * bits**3 / (latency**2 * ts))


def _oracle_fullma_partial(p, spec, tol=1e-9):
    sum_cap = log2_1p(p["a1"] * p["pb1"] + p["a2"] * p["pb2"])

    def ev(axes):
        A = axes[0][:, None, None]
        B = axes[1][None, :, None]
        C = axes[2][None, None, :]
        tau1 = p["lbar1"] / (p["ts"] + p["dc1"] * A)
        with np.errstate(divide="ignore", invalid="ignore"):
            tau1 = np.where(A > 0.0, np.minimum(tau1, p["b1"] / np.maximum(A, 1e-300)), tau1)
        sent1 = np.minimum(tau1 * A, p["b1"])
        sent21 = np.minimum(tau1 * B, p["b2"])
        with np.errstate(divide="ignore", invalid="ignore"):
            air21 = np.where(B > 0.0, sent21 / np.maximum(B, 1e-300), 0.0)
        psum, p11, p21 = _min_powers_grid(p["a1"], p["a2"], p["pb1"], p["pb2"], A, B, tol)
        ok = np.isfinite(psum) | ((A <= 0.0) & (B <= 0.0))
        p11 = np.where(np.isfinite(psum), p11, 0.0)
        p21 = np.where(np.isfinite(psum), p21, 0.0)
        avail3 = p["lbar2"] - tau1 * p["ts"] - p["dc2"] * sent21
        with np.errstate(divide="ignore", invalid="ignore"):
            sent23 = np.where(
                (C > 0.0) & (avail3 > 0.0),
                np.clip(
                    avail3 / (p["ts"] / np.maximum(C, 1e-300) + p["dc2"]),
                    0.0,
                    np.maximum(p["b2"] - sent21, 0.0),
                ),
                0.0,
            )
            tau3 = np.where(C > 0.0, sent23 / np.maximum(C, 1e-300), 0.0)
        p23 = _exp2m1(C) / p["a2"]
        ok = ok & np.where(sent23 > 0.0, p23 <= p["pb2"] * (1.0 + tol), True)
        e = (
            tau1 * p11
            + air21 * p21
            + tau3 * np.where(sent23 > 0.0, p23, 0.0)
            + _loc(p["m1"], p["b1"] - sent1, p["l1"], p["ts"], p["b1"])
            + _loc(p["m2"], p["b2"] - sent21 - sent23, p["l2"], p["ts"], p["b2"])
        )
        return np.where(ok, e, _INF)

    bounds = [
        (0.0, min(p["cap1"], sum_cap)),
        (0.0, min(p["cap2"], sum_cap)),
        (0.0, p["cap2"]),
    ]
    return _refine(ev, bounds, spec)


def _oracle_tdma_partial(p, spec, tol=1e-9):
    def ev(axes):
        R1 = axes[0][:, None, None]
        R2 = axes[1][None, :, None]
        G = axes[2][None, None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            tau2 = np.where(G > 0.0, G * p["b1"] / np.maximum(R1, 1e-300), 0.0)
        ok = tau2 * p["ts"] + p["dc1"] * G * p["b1"] <= p["lbar1"] * (1.0 + tol)
        ok &= np.where(G > 0.0, R1 > 0.0, True)
        with np.errstate(divide="ignore", invalid="ignore"):
            rec = (p["lbar2"] - tau2 * p["ts"]) / (
                p["b2"] * (p["ts"] / np.maximum(R2, 1e-300) + p["dc2"])
            )
            g2 = np.where(R2 > 0.0, np.clip(rec, 0.0, 1.0), 0.0)
            tau3 = np.where(R2 > 0.0, g2 * p["b2"] / np.maximum(R2, 1e-300), 0.0)
        e = (
            tau2 * _exp2m1(R1) / p["a1"]
            + tau3 * _exp2m1(R2) / p["a2"]
            + _loc(p["m1"], (1.0 - G) * p["b1"], p["l1"], p["ts"], p["b1"])
            + _loc(p["m2"], (1.0 - g2) * p["b2"], p["l2"], p["ts"], p["b2"])
        )
        return np.where(ok, e, _INF)

    bounds = [(0.0, p["cap1"]), (0.0, p["cap2"]), (0.0, 1.0)]
    return _refine(ev, bounds, spec)


def _oracle_single_partial(bits, latency, lbar, alpha, pbar, ts, m, dc, spec):
    cap = log2_1p(alpha * pbar)

    def ev(axes):
        r = axes[0]
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.where(
                r > 0.0,
                np.minimum(1.0, lbar / (bits * (ts / np.maximum(r, 1e-300) + dc))),
                0.0,
            )
            air = np.where(r > 0.0, g * bits / np.maximum(r, 1e-300), 0.0)
        return air * _exp2m1(r) / alpha + _loc(m, (1.0 - g) * bits, latency, ts, bits)

    return _refine(ev, [(0.0, cap)], spec)


# ---------------------------------------------------------------------------
# mixed mode


def _binary_local(scenario: Scenario, user: int) -> float | None:
    task = scenario.user1 if user == 1 else scenario.user2
    if task.local_energy is not None:
        return task.local_energy / scenario.symbol_interval
    if task.local_model is not None:
        return task.local_model.chip_constant * task.bits**3 / (
            task.latency**2 * scenario.symbol_interval
        )
    return None


def _oracle_mixed(scenario: Scenario, p, scheme, which, spec, tol=1e-9):
    sum_cap = log2_1p(p["a1"] * p["pb1"] + p["a2"] * p["pb2"])
    grid = (_INF, None, {"slack": 1e-12})

    if which == 1:
        feas_off = p["lbar1"] > p["dc1"] * p["b1"]
        if feas_off:
            r11 = p["b1"] * p["ts"] / (p["lbar1"] - p["dc1"] * p["b1"])
            feas_off = r11 <= p["cap1"] * (1.0 + 1e-9)
        if feas_off and scheme == FULL_MA:
            tau1 = p["b1"] / r11

            def ev(axes):
                B = axes[0][:, None]
                C = axes[1][None, :]
                sent21 = np.minimum(tau1 * B, p["b2"])
                with np.errstate(divide="ignore", invalid="ignore"):
                    air21 = np.where(B > 0.0, sent21 / np.maximum(B, 1e-300), 0.0)
                psum, p11, p21 = _min_powers_grid(
                    p["a1"], p["a2"], p["pb1"], p["pb2"], r11, B, tol
                )
                ok = np.isfinite(psum)
                avail3 = p["lbar2"] - tau1 * p["ts"] - p["dc2"] * sent21
                with np.errstate(divide="ignore", invalid="ignore"):
                    sent23 = np.where(
                        (C > 0.0) & (avail3 > 0.0),
                        np.clip(
                            avail3 / (p["ts"] / np.maximum(C, 1e-300) + p["dc2"]),
                            0.0,
                            np.maximum(p["b2"] - sent21, 0.0),
                        ),
                        0.0,
                    )
                    tau3 = np.where(C > 0.0, sent23 / np.maximum(C, 1e-300), 0.0)
                p23 = _exp2m1(C) / p["a2"]
                ok = ok & np.where(sent23 > 0.0, p23 <= p["pb2"] * (1.0 + tol), True)
                e = (
                    tau1 * p11
                    + air21 * p21
                    + tau3 * np.where(sent23 > 0.0, p23, 0.0)
                    + _loc(p["m2"], p["b2"] - sent21 - sent23, p["l2"], p["ts"], p["b2"])
                )
                return np.where(ok, e, _INF)

            hi21 = min(p["cap2"], sum_cap - r11)
            if hi21 >= 0.0:
                grid = _refine(ev, [(0.0, hi21), (0.0, p["cap2"])], spec)
        elif feas_off:
            r1_min = p["ts"] / (p["lbar1"] / p["b1"] - p["dc1"])

            def ev(axes):
                R1 = axes[0][:, None]
                R2 = axes[1][None, :]
                tau2 = p["b1"] / np.maximum(R1, 1e-300)
                ok = tau2 * p["ts"] + p["dc1"] * p["b1"] <= p["lbar1"] * (1.0 + 1e-9)
                with np.errstate(divide="ignore", invalid="ignore"):
                    rec = (p["lbar2"] - tau2 * p["ts"]) / (
                        p["b2"] * (p["ts"] / np.maximum(R2, 1e-300) + p["dc2"])
                    )
                    g2 = np.where(R2 > 0.0, np.clip(rec, 0.0, 1.0), 0.0)
                    tau3 = np.where(R2 > 0.0, g2 * p["b2"] / np.maximum(R2, 1e-300), 0.0)
                e = (
                    tau2 * _exp2m1(R1) / p["a1"]
                    + tau3 * _exp2m1(R2) / p["a2"]
                    + _loc(p["m2"], (1.0 - g2) * p["b2"], p["l2"], p["ts"], p["b2"])
                )
                return np.where(ok, e, _INF)

            if r1_min <= p["cap1"] * (1.0 + 1e-9):
                grid = _refine(
                    ev, [(min(r1_min, p["cap1"]), p["cap1"]), (0.0, p["cap2"])], spec
                )
        local = _binary_local(scenario, 1)
        other = (
            _oracle_single_partial(
                p["b2"], p["l2"], p["lbar2"], p["a2"], p["pb2"], p["ts"],
                p["m2"], p["dc2"], spec,
            )
            if local is not None
            else None
        )
    else:
        if scheme == FULL_MA:
            def ev(axes):
                A = axes[0][:, None]
                B = axes[1][None, :]
                tau1 = p["lbar1"] / (p["ts"] + p["dc1"] * A)
                with np.errstate(divide="ignore", invalid="ignore"):
                    tau1 = np.where(
                        A > 0.0, np.minimum(tau1, p["b1"] / np.maximum(A, 1e-300)), tau1
                    )
                sent1 = np.minimum(tau1 * A, p["b1"])
                sent21 = np.minimum(tau1 * B, p["b2"])
                with np.errstate(divide="ignore", invalid="ignore"):
                    air21 = np.where(B > 0.0, sent21 / np.maximum(B, 1e-300), 0.0)
                psum, p11, p21 = _min_powers_grid(
                    p["a1"], p["a2"], p["pb1"], p["pb2"], A, B, tol
                )
                ok = np.isfinite(psum) | ((A <= 0.0) & (B <= 0.0))
                p11 = np.where(np.isfinite(psum), p11, 0.0)
                p21 = np.where(np.isfinite(psum), p21, 0.0)
                rem = p["b2"] - sent21
                air3 = (p["lbar2"] - tau1 * p["ts"] - p["dc2"] * p["b2"]) / p["ts"]
                with np.errstate(divide="ignore", invalid="ignore"):
                    r23 = np.where(air3 > 0.0, rem / np.maximum(air3, 1e-300), _INF)
                need3 = rem > tol * p["b2"]
                ok &= np.where(need3, (air3 > 0.0) & (r23 <= p["cap2"] * (1.0 + tol)), True)
                e3 = np.where(
                    need3, np.maximum(air3, 0.0) * _exp2m1(np.where(need3, r23, 0.0)) / p["a2"], 0.0
                )
                e = (
                    tau1 * p11
                    + air21 * p21
                    + e3
                    + _loc(p["m1"], p["b1"] - sent1, p["l1"], p["ts"], p["b1"])
                )
                return np.where(ok, e, _INF)

            grid = _refine(
                ev,
                [(0.0, min(p["cap1"], sum_cap)), (0.0, min(p["cap2"], sum_cap))],
                spec,
            )
        else:
            def ev(axes):
                R1 = axes[0][:, None]
                G = axes[1][None, :]
                with np.errstate(divide="ignore", invalid="ignore"):
                    tau2 = np.where(G > 0.0, G * p["b1"] / np.maximum(R1, 1e-300), 0.0)
                ok = tau2 * p["ts"] + p["dc1"] * G * p["b1"] <= p["lbar1"] * (1.0 + 1e-9)
                denom = p["lbar2"] - tau2 * p["ts"] - p["dc2"] * p["b2"]
                ok &= denom > 0.0
                with np.errstate(divide="ignore", invalid="ignore"):
                    r2 = p["b2"] * p["ts"] / np.maximum(denom, 1e-300)
                ok &= r2 <= p["cap2"] * (1.0 + 1e-9)
                tau3 = np.where(ok, p["b2"] / np.maximum(r2, 1e-300), 0.0)
                e = (
                    tau2 * _exp2m1(R1) / p["a1"]
                    + tau3 * _exp2m1(np.where(ok, r2, 0.0)) / p["a2"]
                    + _loc(p["m1"], (1.0 - G) * p["b1"], p["l1"], p["ts"], p["b1"])
                )
                return np.where(ok, e, _INF)

            grid = _refine(ev, [(0.0, p["cap1"]), (0.0, 1.0)], spec)
        local = _binary_local(scenario, 2)
        other = (
            _oracle_single_partial(
                p["b1"], p["l1"], p["lbar1"], p["a1"], p["pb1"], p["ts"],
                p["m1"], p["dc1"], spec,
            )
            if local is not None
            else None
        )

    e, x, info = grid
    if local is not None and other is not None:
        local_total = local + other[0]
        if local_total < e:
            e, x = local_total, None
            info = dict(other[2])
            info["branch"] = "local"
    return e, x, info


# ---------------------------------------------------------------------------
# dispatch


def oracle_solve(
    scenario: Scenario,
    scheme: str,
    mode: str = BINARY,
    *,
    which_user_binary: int | None = None,
    spec: GridSpec | None = None,
    tol: float = 1e-9,
) -> OracleResult:
    """Grid-search reference optimum for a scheme and divisibility mode."""
    spec = spec or GridSpec()
    if mode == BINARY:
        p = _params(scenario, BINARY)
        if scheme == FULL_MA:
            e, x, info = _oracle_fullma_binary(p, spec, tol)
        elif scheme == TDMA:
            e, x, info = _oracle_tdma_binary(p, spec, tol)
        elif scheme == SDWTS:
            e, x, info = _oracle_sdwts_binary(p, spec, tol)
        elif scheme == ID:
            e, x, info = _oracle_id_binary(p, spec, tol)
        else:
            raise InvalidParameterError(f"unknown scheme {scheme!r}")
    elif mode == PARTIAL:
        p = _params(scenario, PARTIAL)
        if p["m1"] is None or p["m2"] is None:
            raise InvalidParameterError("partial mode needs local compute models")
        if scheme == FULL_MA:
            e, x, info = _oracle_fullma_partial(p, spec, tol)
        elif scheme == TDMA:
            e, x, info = _oracle_tdma_partial(p, spec, tol)
        else:
            raise InvalidParameterError(f"partial mode supports fullma and tdma, not {scheme!r}")
    elif mode == MIXED:
        if which_user_binary not in (1, 2):
            raise InvalidParameterError("mixed mode needs which_user_binary in (1, 2)")
        if scheme not in (FULL_MA, TDMA):
            raise InvalidParameterError(f"mixed mode supports fullma and tdma, not {scheme!r}")
        p = _params(scenario, PARTIAL)
        e, x, info = _oracle_mixed(scenario, p, scheme, which_user_binary, spec, tol)
    else:
        raise InvalidParameterError(f"unknown mode {mode!r}")
    if not math.isfinite(e):
        return OracleResult(feasible=False, energy=None, point=None, info=info)
    return OracleResult(feasible=True, energy=e, point=x, info=info)
