"""One-dimensional minimization and cyclic coordinate descent.

The solver modules reduce every search to bracketed scalar problems whose
shape is known in advance: convex slices are minimized by bisecting a central
finite-difference derivative, quasiconvex ones by golden-section search.  The
interval endpoints are always evaluated as candidates, so a monotone objective
resolves to the correct boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0

CONVEX = "convex"
QUASICONVEX = "quasiconvex"


class EmptyIntervalError(ValueError):
    """A feasible interval is empty, or a descent start point is infeasible."""


class DescentNumericalError(RuntimeError):
    """Coordinate descent observed the objective increasing beyond tolerance."""

    def __init__(self, message: str, trace: list[float]):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class BracketedProblem:
    """A scalar objective on [lower, upper] with a shape hint."""

    objective: Callable[[float], float]
    lower: float
    upper: float
    shape: str = QUASICONVEX

    def __post_init__(self) -> None:
        if self.shape not in (CONVEX, QUASICONVEX):
            raise ValueError(f"unknown shape hint {self.shape!r}")


def _safe(value: float) -> float:
    # nan compares false everywhere; map it to +inf so comparisons stay sane
    if math.isnan(value):
        return math.inf
    return value


def default_x_tol(lower: float, upper: float) -> float:
    return 1e-12 * (upper - lower + 1.0)


def _golden_section(f, lo: float, hi: float, x_tol: float) -> float:
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = _safe(f(c)), _safe(f(d))
    while b - a > x_tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = _safe(f(c))
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = _safe(f(d))
    return 0.5 * (a + b)


def _central_diff(f, x: float, lo: float, hi: float) -> float:
    h = max(1e-7, 1e-7 * abs(x))
    a = max(lo, x - h)
    b = min(hi, x + h)
    if b <= a:
        return 0.0
    return (_safe(f(b)) - _safe(f(a))) / (b - a)

def _derivative_bisection(f, lo: float, hi: float, x_tol: float) -> float:
    dlo = _central_diff(f, lo, lo, hi)
    if not math.isfinite(dlo):
        return _golden_section(f, lo, hi, x_tol)
    if dlo >= 0.0:
        return lo
    dhi = _central_diff(f, hi, lo, hi)
    if not math.isfinite(dhi):
        return _golden_section(f, lo, hi, x_tol)
    if dhi <= 0.0:
        return hi
    a, b = lo, hi
    for _ in range(200):
        if b - a <= x_tol:
            break
        mid = 0.5 * (a + b)
        d = _central_diff(f, mid, lo, hi)
        if not math.isfinite(d):
            return _golden_section(f, lo, hi, x_tol)
        if d < 0.0:
            a = mid
        elif d > 0.0:
            b = mid
        else:
            return mid
    return 0.5 * (a + b)


def minimize_scalar(
    problem: BracketedProblem, x_tol: float | None = None
) -> tuple[float, float]:
    """Minimize a bracketed scalar problem.

    Returns ``(argmin, value)``.  The two endpoints and the interior point
    found by the shape-appropriate search are all evaluated; ties go to the
    smallest argmin.  Raises EmptyIntervalError when lower > upper.
    """
    lo, hi = problem.lower, problem.upper
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise EmptyIntervalError(f"interval bounds must be finite, got [{lo}, {hi}]")
    if lo > hi:
        if lo - hi <= 1e-9 * (abs(lo) + abs(hi) + 1.0):
            lo = hi = 0.5 * (lo + hi)
        else:
            raise EmptyIntervalError(f"empty interval [{lo}, {hi}]")
    if x_tol is None:
        x_tol = default_x_tol(lo, hi)
    f = problem.objective
    candidates = [lo, hi]
    if hi - lo > x_tol:
        if problem.shape == CONVEX:
            candidates.append(_derivative_bisection(f, lo, hi, x_tol))
        else:
            candidates.append(_golden_section(f, lo, hi, x_tol))
    best_x = None
    best_v = math.inf
    for x in candidates:
        v = _safe(f(x))
        if v < best_v or (v == best_v and (best_x is None or x < best_x)):
            best_x, best_v = x, v
    return best_x, best_v


@dataclass(frozen=True)
class DescentReport:
    """Outcome of a coordinate descent run.

    ``iterations`` counts completed sweeps, ``objective_trace`` records the
    objective after each sweep, and ``converged`` is set only when the
    relative-decrease stop fired before the sweep limit.
    """

    iterations: int
    final_objective: float
    point: tuple[float, ...]
    converged: bool
    objective_trace: tuple[float, ...]


BoundsGenerator = Callable[[Sequence[float]], object]


def _pieces(raw) -> list[tuple[float, float]]:
    """Normalize a bound generator result to a list of (lo, hi) pieces."""
    if raw is None:
        return []
    if isinstance(raw, tuple) and len(raw) == 2 and not isinstance(raw[0], tuple):
        raw = [raw]
    out = []
    for lo, hi in raw:
        if lo > hi:
            if lo - hi <= 1e-9 * (abs(lo) + abs(hi) + 1.0):
                mid = 0.5 * (lo + hi)
                out.append((mid, mid))
            continue
        out.append((float(lo), float(hi)))
    return out


def coordinate_descent(
    objective: Callable[[Sequence[float]], float],
    bounds: Sequence[BoundsGenerator],
    x0: Sequence[float],
    *,
    shapes: str | Sequence[str] = QUASICONVEX,
    rel_tol: float = 1e-9,
    max_iters: int = 500,
    x_tol: float | None = None,
) -> DescentReport:
    """Cyclic coordinate descent with exact scalar line minimization.

    ``bounds[i]`` maps the current point to the feasible interval (or a list
    of interval pieces) of coordinate i given the other coordinates; every
    piece is minimized and the best candidate kept.  Coordinates are visited
    in fixed order.  A sweep that fails to decrease the objective by
    ``rel_tol`` relative terminates the descent with ``converged=True``.

    Raises EmptyIntervalError for an infeasible start or a vanished interval,
    and DescentNumericalError (with the sweep trace) if a slice minimum comes
    out above the incumbent by more than a float-noise guard.
    """
    n = len(x0)
    if isinstance(shapes, str):
        shapes = [shapes] * n
    if len(shapes) != n or len(bounds) != n:
        raise ValueError("bounds, shapes and x0 must have matching lengths")
    x = [float(v) for v in x0]
    f_cur = _safe(objective(x))
    if not math.isfinite(f_cur):
        raise EmptyIntervalError(f"starting point {tuple(x)} has non-finite objective")
    trace: list[float] = []
    converged = False
    for _ in range(max_iters):
        f_prev = f_cur
        for i in range(n):
            pieces = _pieces(bounds[i](x))
            if not pieces:
                raise EmptyIntervalError(
                    f"coordinate {i} has no feasible interval at {tuple(x)}"
                )

            def slice_f(t: float, i: int = i) -> float:
                old = x[i]
                x[i] = t
                try:
                    return objective(x)
                finally:
                    x[i] = old

            best_x, best_v = x[i], f_cur
            for lo, hi in pieces:
                xi, vi = minimize_scalar(
                    BracketedProblem(slice_f, lo, hi, shapes[i]), x_tol
                )
                if vi < best_v or (vi == best_v and xi < best_x):
                    best_x, best_v = xi, vi
            guard = 1e-12 * (1.0 + abs(f_cur))
            if best_v < f_cur:
                x[i] = best_x
                f_cur = best_v
            elif best_v > f_cur + guard and math.isfinite(f_cur):
                raise DescentNumericalError(
                    f"slice minimum {best_v} above incumbent {f_cur} at coordinate {i}",
                    trace,
                )
        trace.append(f_cur)
        if f_prev - f_cur <= rel_tol * max(1.0, abs(f_prev)):
            converged = True
            break
    return DescentReport(
        iterations=len(trace),
        final_objective=f_cur,
        point=tuple(x),
        converged=converged,
        objective_trace=tuple(trace),
    )


def multi_start_descent(
    objective: Callable[[Sequence[float]], float],
    bounds: Sequence[BoundsGenerator],
    inits: Sequence[Sequence[float]],
    *,
    shapes: str | Sequence[str] = QUASICONVEX,
    rel_tol: float = 1e-9,
    max_iters: int = 500,
    x_tol: float | None = None,
) -> DescentReport | None:
    """Run coordinate_descent from each init and keep the best report.

    Inits that are infeasible (EmptyIntervalError) are skipped; returns None
    when none survives.
    """
    best: DescentReport | None = None
    for x0 in inits:
        try:
            report = coordinate_descent(
                objective,
                bounds,
                x0,
                shapes=shapes,
                rel_tol=rel_tol,
                max_iters=max_iters,
                x_tol=x_tol,
            )
        except EmptyIntervalError:
            continue
        if best is None or report.final_objective < best.final_objective:
            best = report
    return best
