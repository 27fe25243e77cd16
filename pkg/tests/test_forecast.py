import os
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from trafficcast.diffusion import PenetrationSource, RolloutSchedule
from trafficcast.errors import ConfigError, DomainError, ParameterError
from trafficcast.forecast import (
    DeviceSpec,
    Scenario,
    cagr,
    category_rollup,
    forecast,
    median_density,
    peak_density,
    peak_hour,
)
from trafficcast.profile import HourlyProfile
from trafficcast.volume import CATEGORIES, HUMAN, ActivityModel, ApplicationSpec, ConstantGrowth

YEARS = list(range(2018, 2031))
DENSITIES = {"area": HourlyProfile.constant(1.0), "people": HourlyProfile(np.linspace(1.0, 24.0, 24))}


def test_totals_near_published(slow, rapid):
    print("\n=== Testing daily totals ===")
    for result, year, published in ((slow, 2019, 8740), (slow, 2030, 117440), (rapid, 2030, 225573)):
        total = result.daily_total(year)
        print(f"{result.scenario_name} {year}: {total:,.0f} GB/km2/day (published {published:,})")
        assert total == pytest.approx(published, rel=0.10)


def test_category_partition(slow, rapid):
    for result in (slow, rapid):
        for year in result.years:
            totals = result.category_totals(year)
            assert set(totals) == set(CATEGORIES)
            assert sum(totals.values()) == pytest.approx(result.volume[result.year_index(year)].sum(), rel=1e-12)
            assert totals["machine_low_activity"] == 0.0


def test_rapid_dominates_slow(slow, rapid):
    print("\n=== Testing rapid >= slow ===")
    assert np.all(rapid.volume >= slow.volume - 1e-9)
    assert np.all(rapid.density >= slow.density - 1e-9)
    for year in slow.years:
        assert rapid.daily_total(year) >= slow.daily_total(year)


def test_shares(slow, rapid):
    print("\n=== Testing device and category shares ===")
    for result, year, phone, human in ((slow, 2019, 0.89, 0.99), (slow, 2030, 0.80, 0.92), (rapid, 2030, 0.69, 0.80)):
        total = result.daily_total(year)
        share = result.application_daily(year, "smartphones", "smartphone_all") / total
        rollup = category_rollup(result)
        print(f"{result.scenario_name} {year}: smartphone {share:.3f}, human {rollup[HUMAN]['shares'][year]:.3f}")
        assert abs(share - phone) <= 0.02
        assert abs(rollup[HUMAN]["shares"][year] - human) <= 0.02


def test_peak_hour(slow, rapid):
    print("\n=== Testing peak hour ===")
    for result in (slow, rapid):
        for year in result.years:
            assert peak_hour(result, year).hour == 16
    assert abs(peak_hour(slow, 2019).share - 0.077) <= 0.003
    assert abs(peak_hour(slow, 2030).share - 0.075) <= 0.003
    assert abs(peak_hour(rapid, 2030).share - 0.072) <= 0.003


def test_cagr(slow, rapid):
    slow_cagr = cagr(slow.daily_total(2019), slow.daily_total(2030), 11)
    rapid_cagr = cagr(rapid.daily_total(2019), rapid.daily_total(2030), 11)
    print(f"CAGR 2019-2030: slow {slow_cagr:.1%}, rapid {rapid_cagr:.1%}")
    assert 0.25 <= slow_cagr <= 0.28
    assert 0.33 <= rapid_cagr <= 0.36
    assert rapid.daily_total(2019) == pytest.approx(slow.daily_total(2019), rel=0.05)
    assert cagr(100.0, 121.0, 2) == pytest.approx(0.1)
    with pytest.raises(DomainError):
        cagr(0.0, 10.0, 5)
    with pytest.raises(DomainError):
        cagr(1.0, 10.0, 0)


def test_static_densities(slow, rapid):
    print("\n=== Testing static device densities ===")
    assert median_density(slow, 2019).per_device["meters"] == pytest.approx(269.5)
    assert median_density(slow, 2030).per_device["meters"] == pytest.approx(539.0)
    assert median_density(rapid, 2030).per_device["pos"] == pytest.approx(4312.0)
    assert median_density(slow, 2030).per_device["cameras"] == pytest.approx(102.4)
    assert median_density(rapid, 2030).per_device["cameras"] == pytest.approx(204.8)
    assert median_density(slow, 2019).total == pytest.approx(21876, rel=0.10)
    summary = peak_density(slow, 2030)
    assert summary.total == pytest.approx(sum(summary.per_device.values()))


def test_camera_volume(slow, rapid):
    assert slow.application_daily(2030, "cameras", "camera_surveillance") == pytest.approx(6912, rel=0.01)
    assert rapid.application_daily(2030, "cameras", "camera_surveillance") == pytest.approx(35942, rel=0.01)


def test_frame_layout(slow, config):
    frame = slow.to_frame()
    assert len(frame) == len(config.years) * len(slow.app_keys) * 24
    assert list(frame.columns[:6]) == ["year", "scenario", "device", "application", "category", "hour"]
    assert frame["volume_gb_km2"].sum() == pytest.approx(sum(slow.daily_totals().values()), rel=1e-12)


def test_reruns_are_bit_identical(config, engine):
    print("\n=== Testing deterministic reruns ===")
    first = forecast(config.devices, Scenario.rapid(), config.years, engine.densities, engine.profiles)
    second = forecast(config.devices, Scenario.rapid(), config.years, engine.densities, engine.profiles)
    assert np.array_equal(first.volume, second.volume)
    assert np.array_equal(first.density, second.density)
    assert first.to_frame().equals(second.to_frame())


def test_empty_registry():
    result = forecast([], Scenario.slow(), YEARS, DENSITIES)
    assert result.daily_total(2030) == 0.0
    assert np.all(result.hourly_totals(2019) == 0.0)
    assert category_rollup(result)[HUMAN]["shares"][2019] == 0.0


def test_unknown_binding_and_year():
    device = make_device("d0", 10.0, 10.0, 0.1, 0.2, 1.0, 2.0, binding="nowhere")
    with pytest.raises(ConfigError):
        forecast([device], Scenario.slow(), YEARS, DENSITIES)
    result = forecast([], Scenario.slow(), YEARS, DENSITIES)
    with pytest.raises(ParameterError):
        result.year_index(2040)


def test_scenario_overrides():
    scenario = Scenario("mixed", "low", devices={"d0": "high"}, applications={"d0.app": "medium"}, control="high")
    assert scenario.device_estimate("d0") == "high"
    assert scenario.device_estimate("d1") == "low"
    assert scenario.application_estimate("d0", "app") == "medium"
    assert scenario.control_estimate() == "high"
    with pytest.raises(ParameterError):
        Scenario("bad", "extreme")


def make_device(device_id, max_low, max_high, frac_low, frac_high, vol_low, vol_high, binding="area",
                category=HUMAN, start=2020, activity=None):
    penetration = PenetrationSource("coverage", {
        "low": RolloutSchedule(max_low, frac_low, start),
        "high": RolloutSchedule(max_high, frac_high, start),
    })
    app = ApplicationSpec(
        "app", device_id, category, "constant",
        {"low": ConstantGrowth(vol_low), "high": ConstantGrowth(vol_high)},
        activity or ActivityModel("uniform_24h"),
    )
    return DeviceSpec(device_id, "area", penetration, binding, [app])


pair = st.tuples(st.floats(0.0, 1e3), st.floats(0.0, 1e3)).map(sorted)
unit_pair = st.tuples(st.floats(0.0, 1.0), st.floats(0.0, 1.0)).map(sorted)
device_params = st.tuples(pair, unit_pair, pair, st.sampled_from(CATEGORIES), st.sampled_from(["area", "people"]),
                          st.integers(2018, 2030))


@settings(max_examples=1000, deadline=None)
@given(params=st.lists(device_params, min_size=0, max_size=5))
def test_random_registry_properties(params):
    registry = [
        make_device(f"d{i}", dens[0], dens[1], frac[0], frac[1], vol[0], vol[1], binding, category, start)
        for i, (dens, frac, vol, category, binding, start) in enumerate(params)
    ]
    slow_result = forecast(registry, Scenario.slow(), YEARS, DENSITIES)
    rapid_result = forecast(registry, Scenario.rapid(), YEARS, DENSITIES)
    for year in YEARS:
        totals = slow_result.category_totals(year)
        grand = slow_result.volume[slow_result.year_index(year)].sum()
        assert abs(sum(totals.values()) - grand) <= 1e-9 * max(grand, 1.0)
        assert rapid_result.daily_total(year) >= slow_result.daily_total(year) - 1e-9 * max(grand, 1.0)
    assert np.all(rapid_result.volume >= slow_result.volume - 1e-9)
    again = forecast(registry, Scenario.slow(), YEARS, DENSITIES)
    assert np.array_equal(again.volume, slow_result.volume)


def test_windowless_active_hours_forecast():
    print("\n=== Testing windowless active-hour volumes ===")
    activity = ActivityModel("uniform_over_active_hours", active_hours=10)
    device = make_device("d0", 10.0, 10.0, 0.1, 0.1, 2.0, 2.0, binding="people", activity=activity)
    result = forecast([device], Scenario.slow(), YEARS, DENSITIES)
    # penetration 1, presence sums to 300 over the day, 10 active hours, 2 GB/day
    assert result.application_daily(2020, "d0", "app") == pytest.approx(1.0 * 300.0 / 10.0 * 2.0)
    assert result.application_daily(2019, "d0", "app") == 0.0
    hourly = result.application_hourly(2020, "d0", "app")
    assert hourly[23] == pytest.approx(24.0 * hourly[0])
    idle = {"area": DENSITIES["area"], "people": HourlyProfile(np.zeros(24))}
    assert forecast([device], Scenario.slow(), YEARS, idle).daily_total(2030) == 0.0


@settings(max_examples=1000, deadline=None)
@given(params=st.lists(device_params, min_size=1, max_size=6), split=st.integers(0, 6))
def test_registry_split_is_additive(params, split):
    registry = [
        make_device(f"d{i}", dens[0], dens[1], frac[0], frac[1], vol[0], vol[1], binding, category, start)
        for i, (dens, frac, vol, category, binding, start) in enumerate(params)
    ]
    whole = forecast(registry, Scenario.rapid(), YEARS, DENSITIES)
    first = forecast(registry[:split], Scenario.rapid(), YEARS, DENSITIES)
    second = forecast(registry[split:], Scenario.rapid(), YEARS, DENSITIES)
    for year in YEARS:
        total = whole.daily_total(year)
        assert abs(total - first.daily_total(year) - second.daily_total(year)) <= 1e-9 * max(total, 1.0)
        combined = first.hourly_totals(year) + second.hourly_totals(year)
        assert np.allclose(whole.hourly_totals(year), combined, rtol=1e-9, atol=1e-9)


@settings(max_examples=1000, deadline=None)
@given(params=device_params, k=st.floats(0.0, 50.0))
def test_penetration_scaling_is_homogeneous(params, k):
    dens, frac, vol, category, binding, start = params
    base = forecast([make_device("d0", dens[0], dens[1], frac[0], frac[1], vol[0], vol[1], binding, category, start)],
                    Scenario.slow(), YEARS, DENSITIES)
    scaled = forecast([make_device("d0", k * dens[0], k * dens[1], frac[0], frac[1], vol[0], vol[1], binding,
                                   category, start)], Scenario.slow(), YEARS, DENSITIES)
    for year in YEARS:
        expected = k * base.daily_total(year)
        assert abs(scaled.daily_total(year) - expected) <= 1e-9 * max(expected, 1.0)


if __name__ == "__main__":
    test_empty_registry()
    test_unknown_binding_and_year()
    test_scenario_overrides()
    test_windowless_active_hours_forecast()
    print("\nAll forecast tests completed!")
