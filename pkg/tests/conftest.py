"""Shared scenario generators for the test suite.

Random scenarios are unit normalized (symbol interval 1, noise 1) so windows,
rates and energies all sit within a few orders of magnitude of one; the
solvers only ever see dimensionless products like alpha * P.  Pool builders
are seeded and reject draws whose feasibility margin is below MARGIN, keeping
verdict comparisons away from boundaries.
"""

import random

from hypothesis import HealthCheck, settings

from macoff import (
    LocalComputeModel,
    RadioLink,
    TaskSpec,
    build_scenario,
    feasibility_slack,
)

settings.register_profile(
    "suite",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

MARGIN = 1e-6


def rel_gap(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-12)


def random_binary_scenario(rng: random.Random):
    """Two indivisible tasks straddling the offload feasibility boundary."""
    u1 = TaskSpec(bits=rng.uniform(0.5, 4.0), latency=rng.uniform(2.0, 5.0))
    u2 = TaskSpec(bits=rng.uniform(0.5, 6.0), latency=rng.uniform(2.0, 8.0))
    link1 = RadioLink(rng.uniform(0.2, 3.0), rng.uniform(0.5, 8.0))
    link2 = RadioLink(rng.uniform(0.2, 3.0), rng.uniform(0.5, 8.0))
    return build_scenario(u1, u2, link1, link2, noise=1.0, symbol_interval=1.0)


def binary_pool(scheme: str, count: int, seed: int, max_infeasible: int = 60):
    """Scenarios feasible for ``scheme`` with margin, plus margin-filtered
    infeasible draws seen along the way (for verdict-agreement checks)."""
    rng = random.Random(seed)
    feasible, infeasible = [], []
    while len(feasible) < count:
        sc = random_binary_scenario(rng)
        slack = feasibility_slack(sc, scheme)
        if abs(slack) < MARGIN:
            continue
        if slack > 0.0:
            feasible.append(sc)
        elif len(infeasible) < max_infeasible:
            infeasible.append(sc)
    return feasible, infeasible


def random_partial_scenario(rng: random.Random, with_binary_local: bool = False):
    """Two divisible tasks; optionally also price full local runs so the same
    scenario works for mixed mode's local branch."""
    b1, b2 = rng.uniform(0.5, 4.0), rng.uniform(0.5, 4.0)
    l1 = rng.uniform(1.5, 4.0)
    l2 = l1 + rng.uniform(0.0, 3.0)
    lm1 = LocalComputeModel(rng.uniform(0.5, 20.0), rng.uniform(0.0, 0.1))
    lm2 = LocalComputeModel(rng.uniform(0.5, 20.0), rng.uniform(0.0, 0.1))
    le1 = le2 = None
    if with_binary_local and rng.random() < 0.5:
        le1 = rng.uniform(0.5, 30.0)
        le2 = rng.uniform(0.5, 30.0)
    u1 = TaskSpec(b1, l1, 0.0, rng.uniform(0.0, 0.3), local_energy=le1, local_model=lm1)
    u2 = TaskSpec(b2, l2, 0.0, rng.uniform(0.0, 0.3), local_energy=le2, local_model=lm2)
    link1 = RadioLink(rng.uniform(0.2, 3.0), rng.uniform(0.5, 8.0))
    link2 = RadioLink(rng.uniform(0.2, 3.0), rng.uniform(0.5, 8.0))
    return build_scenario(u1, u2, link1, link2, noise=1.0, symbol_interval=1.0)


def partial_pool(count: int, seed: int, with_binary_local: bool = False):
    rng = random.Random(seed)
    return [random_partial_scenario(rng, with_binary_local) for _ in range(count)]


def random_equal_gain_scenario(rng: random.Random):
    """Equal channel gains with roomy budgets, carrying both local-cost forms."""
    gain = rng.uniform(0.3, 2.0)
    b1, b2 = rng.uniform(0.5, 3.0), rng.uniform(0.5, 3.0)
    l1 = rng.uniform(2.0, 4.0)
    l2 = l1 + rng.uniform(0.1, 3.0)
    lm1 = LocalComputeModel(rng.uniform(0.5, 20.0))
    lm2 = LocalComputeModel(rng.uniform(0.5, 20.0))
    u1 = TaskSpec(b1, l1, local_energy=rng.uniform(0.5, 30.0), local_model=lm1)
    u2 = TaskSpec(b2, l2, local_energy=rng.uniform(0.5, 30.0), local_model=lm2)
    link1 = RadioLink(gain, rng.uniform(3.0, 8.0))
    link2 = RadioLink(gain, rng.uniform(3.0, 8.0))
    return build_scenario(u1, u2, link1, link2, noise=1.0, symbol_interval=1.0)
