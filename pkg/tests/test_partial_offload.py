"""Divisible-task solvers: offload fractions, mixed mode, TDMA equivalence."""

import math
import random

import pytest

from conftest import partial_pool, random_equal_gain_scenario
from macoff.binary_offload import solve_full_ma
from macoff.model import (
    FULL_MA,
    TDMA,
    LocalComputeModel,
    RadioLink,
    TaskSpec,
    build_scenario,
    check_solution,
    local_energy_dvs,
)
from macoff.partial_offload import (
    partial_params,
    solve_mixed,
    solve_partial,
    solve_partial_full_ma,
    solve_partial_single_user,
    solve_partial_tdma,
)
from macoff.simlab.config import load_config


def divisible_scenario(gain, chip=12.0, budget=6.0):
    model = LocalComputeModel(chip_constant=chip)
    u1 = TaskSpec(bits=2.0, latency=2.5, local_model=model)
    u2 = TaskSpec(bits=3.0, latency=4.0, local_model=model)
    return build_scenario(
        u1, u2, RadioLink(gain, budget), RadioLink(gain, budget),
        noise=1.0, symbol_interval=1.0,
    )


def test_strong_channel_offloads_everything():
    sol = solve_partial_full_ma(divisible_scenario(1e12))
    assert sol.feasible
    assert sol.allocation.gamma11 == pytest.approx(1.0, abs=1e-6)
    assert sol.allocation.gamma21 + sol.allocation.gamma23 == pytest.approx(1.0, abs=1e-6)
    assert sol.total_energy <= 1e-9


def test_dead_channel_computes_everything_locally():
    sc = divisible_scenario(1e-12)
    sol = solve_partial_full_ma(sc)
    assert sol.feasible
    assert sol.allocation.gamma11 <= 1e-6
    expected = local_energy_dvs(sc.user1.local_model, 2.0, 2.5) + local_energy_dvs(
        sc.user2.local_model, 3.0, 4.0
    )
    assert sol.total_energy_joules == pytest.approx(expected, rel=1e-9)


class TestSingleUserPartial:
    def test_strong_channel(self):
        sol = solve_partial_single_user(1e6, 1.2, 1.0, 1e12, 10.0, 1e-6, 1e-18)
        assert sol.allocation.gamma11 == pytest.approx(1.0, abs=1e-5)
        assert sol.total_energy_joules <= 1e-9

    def test_dead_channel(self):
        sol = solve_partial_single_user(1e6, 1.2, 1.0, 1e-12, 10.0, 1e-6, 1e-18)
        assert sol.allocation.gamma11 <= 1e-9
        assert sol.total_energy_joules == pytest.approx(1e-18 * 1e18 / 1.44, rel=1e-9)

    def test_matches_dense_rate_grid(self):
        bits, latency, lbar, alpha, ts, chip = 1e6, 1.2, 1.0, 1.0, 1e-6, 1e-18
        sol = solve_partial_single_user(bits, latency, lbar, alpha, 10.0, ts, chip)

        def joules(r):
            gamma = min(1.0, r * lbar / (bits * ts))
            air = gamma * bits / r if r > 0.0 else 0.0
            tx = ts * air * (2.0**r - 1.0) / alpha
            return tx + chip * (bits * (1.0 - gamma)) ** 3 / latency**2

        cap = math.log2(11.0)
        best = min(joules(i * 1e-5) for i in range(1, int(cap / 1e-5)))
        assert sol.total_energy_joules <= best * (1.0 + 1e-4)
        assert best <= sol.total_energy_joules * (1.0 + 1e-4)


class TestEqualGains:
    def test_tdma_matches_full_ma_on_divisible_tasks(self):
        sc = load_config("fig7-8").template.build(h1_sq=0.5)
        full = solve_partial_full_ma(sc)
        tdma = solve_partial_tdma(sc)
        assert full.feasible and tdma.feasible
        assert tdma.total_energy == pytest.approx(full.total_energy, rel=1e-6)

    def test_strong_user1_beats_time_division_even_when_indivisible(self):
        sc = load_config("fig7-8").template.build(h1_sq=2.5)
        binary_full = solve_full_ma(sc)
        partial_tdma = solve_partial_tdma(sc)
        assert binary_full.feasible and partial_tdma.feasible
        assert binary_full.total_energy < partial_tdma.total_energy

    def test_mixed_mode_keeps_the_equivalence(self):
        rng = random.Random(31)
        checked = 0
        while checked < 3:
            sc = random_equal_gain_scenario(rng)
            budget = min(sc.link1.power_budget, sc.link2.power_budget)
            full = solve_mixed(sc, 1, FULL_MA)
            if not full.feasible:
                continue
            if full.allocation.P11 + full.allocation.P21 > budget:
                continue
            tdma = solve_mixed(sc, 1, TDMA)
            assert tdma.feasible
            assert tdma.total_energy == pytest.approx(full.total_energy, rel=1e-6)
            checked += 1


class TestMixedBranches:
    def test_free_local_keeps_binary_user_home(self):
        model = LocalComputeModel(chip_constant=8.0)
        u1 = TaskSpec(bits=2.0, latency=2.5, local_energy=0.0)
        u2 = TaskSpec(bits=3.0, latency=4.0, local_model=model)
        sc = build_scenario(
            u1, u2, RadioLink(1.0, 5.0), RadioLink(1.0, 5.0),
            noise=1.0, symbol_interval=1.0,
        )
        sol = solve_mixed(sc, 1)
        assert sol.feasible
        assert sol.allocation.gamma11 == 0.0

    def test_cloud_time_swallows_the_window(self):
        # two seconds of server time per bit pair: no rate can finish in time
        u1 = TaskSpec(
            bits=1e6,
            latency=1.0,
            local_energy=5.0,
            local_model=LocalComputeModel(chip_constant=1e-18, cloud_time_per_bit=2e-6),
        )
        u2 = TaskSpec(bits=1e5, latency=2.0, local_model=LocalComputeModel(1e-18))
        sc = build_scenario(
            u1, u2, RadioLink(1e3, 5.0), RadioLink(1e3, 5.0),
            noise=1e-7, symbol_interval=1e-6,
        )
        sol = solve_mixed(sc, 1)
        assert sol.feasible
        assert sol.allocation.gamma11 == 0.0
        assert sol.energy1 == pytest.approx(5.0 / 1e-6)


def test_partial_never_above_binary_or_all_local():
    for sc in partial_pool(10, seed=2024, with_binary_local=True):
        p = partial_params(sc)
        sol = solve_partial(sc, FULL_MA)
        assert sol.feasible
        assert not check_solution(sc, sol)
        all_local = p.local1(p.b1) + p.local2(p.b2)
        assert sol.total_energy <= all_local * (1.0 + 1e-9)
        full_offload = solve_full_ma(sc)
        if full_offload.feasible:
            assert sol.total_energy <= full_offload.total_energy * (1.0 + 1e-9)
