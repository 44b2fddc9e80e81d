"""Scenario types, capacity regions and the DVS local-energy model."""

import math

import pytest
from hypothesis import given, strategies as st

from macoff.model import (
    BINARY,
    FULL_MA,
    ID,
    PARTIAL,
    SDWTS,
    TDMA,
    InfeasibleLatencyError,
    InvalidParameterError,
    LocalComputeModel,
    RadioLink,
    TaskSpec,
    build_scenario,
    effective_gain,
    local_energy_dvs,
    normalized_latency,
    original_order,
    region_member,
)


def test_effective_gain_scales_by_noise():
    assert effective_gain(0.1, 1e-7) == pytest.approx(1e6)
    assert effective_gain(1.0, 1.0) == 1.0
    assert effective_gain(0.24, 2e-9) == pytest.approx(1.2e8)


def test_effective_gain_rejects_nonpositive():
    with pytest.raises(InvalidParameterError):
        effective_gain(0.0, 1.0)
    with pytest.raises(InvalidParameterError):
        effective_gain(1.0, -1e-9)


def test_normalized_latency_binary_counts_channel_uses():
    task = TaskSpec(bits=1e6, latency=2.5, exec_time=0.5)
    assert normalized_latency(task, 1e-6, BINARY) == pytest.approx(2e6)


def test_normalized_latency_partial_keeps_seconds():
    task = TaskSpec(bits=1e6, latency=2.0, downlink_time=0.2)
    assert normalized_latency(task, 1e-6, PARTIAL) == pytest.approx(1.8)


def test_normalized_latency_rejects_exhausted_budget():
    task = TaskSpec(bits=1.0, latency=1.0, exec_time=0.8, downlink_time=0.3)
    with pytest.raises(InfeasibleLatencyError):
        normalized_latency(task, 1.0, BINARY)


def test_full_ma_region_sum_rate_cap():
    # unit gains and powers: individual caps are 1 bit, sum cap is log2(3)
    assert not region_member(FULL_MA, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0)
    assert region_member(FULL_MA, 1.0, 0.585, 1.0, 1.0, 1.0, 1.0, tol=1e-3)


def test_id_region_excludes_symmetric_unit_rates():
    # 2^-1 + 2^-1 = 1 sits exactly on the interference boundary
    assert not region_member(ID, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0)


def test_local_energy_dvs_values():
    model = LocalComputeModel(chip_constant=2.0)
    assert local_energy_dvs(model, 0.0, 1.0) == 0.0
    assert local_energy_dvs(model, 2.0, 2.0) == pytest.approx(4.0)
    with pytest.raises(InvalidParameterError):
        local_energy_dvs(model, 1.0, 0.0)


def test_build_scenario_orders_by_latency():
    early = TaskSpec(bits=1.0, latency=2.0)
    late = TaskSpec(bits=2.0, latency=3.0)
    l1, l2 = RadioLink(1.0, 1.0), RadioLink(2.0, 2.0)

    kept = build_scenario(early, late, l1, l2, noise=1.0, symbol_interval=1.0)
    assert kept.permutation == (1, 2)
    assert kept.user1 is early

    swapped = build_scenario(late, early, l2, l1, noise=1.0, symbol_interval=1.0)
    assert swapped.permutation == (2, 1)
    assert swapped.user1 is early
    assert swapped.link1 is l1
    assert original_order(("a", "b"), swapped.permutation) == ("b", "a")
    assert original_order(("a", "b"), kept.permutation) == ("a", "b")


rates = st.floats(min_value=0.0, max_value=6.0)
powers = st.floats(min_value=1e-3, max_value=20.0)
gains = st.floats(min_value=1e-2, max_value=50.0)


@given(rates, rates, powers, powers, gains, gains)
def test_regions_nest(r11, r21, p11, p21, a1, a2):
    # every ID point decodes sequentially, every sequential point jointly
    if region_member(ID, r11, r21, p11, p21, a1, a2):
        assert region_member(SDWTS, r11, r21, p11, p21, a1, a2, tol=1e-7)
    if region_member(SDWTS, r11, r21, p11, p21, a1, a2):
        assert region_member(FULL_MA, r11, r21, p11, p21, a1, a2, tol=1e-7)
    if region_member(TDMA, r11, r21, p11, p21, a1, a2):
        assert region_member(FULL_MA, r11, r21, p11, p21, a1, a2, tol=1e-7)


@given(rates, rates, rates, powers, powers, gains, gains)
def test_full_ma_membership_is_rate_monotone(r11, r21, lower, p11, p21, a1, a2):
    if region_member(FULL_MA, r11, r21, p11, p21, a1, a2):
        assert region_member(
            FULL_MA, min(r11, lower), r21, p11, p21, a1, a2, tol=1e-7
        )


@given(
    st.floats(min_value=0.01, max_value=5.0),
    st.floats(min_value=0.01, max_value=5.0),
    st.floats(min_value=0.1, max_value=10.0),
)
def test_dvs_energy_is_midpoint_convex_in_bits(b1, b2, latency):
    model = LocalComputeModel(chip_constant=3.0)
    mid = local_energy_dvs(model, (b1 + b2) / 2.0, latency)
    avg = (local_energy_dvs(model, b1, latency) + local_energy_dvs(model, b2, latency)) / 2.0
    assert mid <= avg * (1.0 + 1e-12) + 1e-15
