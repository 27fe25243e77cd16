import os
import sys

import pytest
from hypothesis import given, settings, strategies as st

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from trafficcast.capacity import CapacityAssumption, capacity_crossing_year, sweep
from trafficcast.errors import ParameterError

SERIES = {2019: 100.0, 2020: 150.0, 2021: 250.0, 2022: 400.0, 2023: 390.0, 2024: 700.0}


def test_crossing_year():
    print("\n=== Testing capacity crossing year ===")
    assert capacity_crossing_year(SERIES, 2019, CapacityAssumption("x1", 1)) == 2019
    assert capacity_crossing_year(SERIES, 2019, CapacityAssumption("x4", 4)) == 2022
    assert capacity_crossing_year(SERIES, 2019, CapacityAssumption("x5", 5)) == 2024
    assert capacity_crossing_year(SERIES, 2019, CapacityAssumption("x10", 10)) is None


def test_crossing_preconditions():
    with pytest.raises(ParameterError):
        capacity_crossing_year(SERIES, 2018, CapacityAssumption("x4", 4))
    with pytest.raises(ParameterError):
        capacity_crossing_year({2019: 0.0, 2020: 1.0}, 2019, CapacityAssumption("x4", 4))
    with pytest.raises(ParameterError):
        CapacityAssumption("none", 0)


def test_sweep_ordering():
    assumptions = [CapacityAssumption("b", 7), CapacityAssumption("a", 4)]
    report = sweep({"slow": SERIES, "rapid": {y: v * 2 for y, v in SERIES.items()}}, assumptions, 2019)
    assert len(report) == 4
    assert [c.multiplier for c in report] == [4, 4, 7, 7]
    assert [c.scenario for c in report][:2] == ["rapid", "slow"]
    assert report.year("slow", "a") == 2022
    frame = report.to_frame()
    assert list(frame.columns) == ["scenario", "assumption", "multiplier", "crossing_year"]
    with pytest.raises(KeyError):
        report.year("slow", "missing")


def test_helsinki_crossings(engine, slow, rapid):
    print("\n=== Testing Helsinki capacity timing ===")
    report = engine.capacity([slow, rapid])
    for crossing in report:
        print(f"  {crossing.assumption:<28} x{crossing.multiplier:<4g} {crossing.scenario:<6} {crossing.year}")
    assert report.year("slow", "macro 3.5 GHz + uplink") == 2025
    assert abs(report.year("slow", "mMIMO / extra mid-band") - 2028) <= 1
    assert report.year("slow", "2.1/2.6 GHz refarming") == 2029
    for assumption in engine.config.capacity:
        assert report.year("rapid", assumption.name) <= report.year("slow", assumption.name)


@settings(max_examples=1000, deadline=None)
@given(
    peaks=st.lists(st.floats(0.01, 1e6), min_size=2, max_size=15),
    multipliers=st.tuples(st.floats(0.1, 50.0), st.floats(0.1, 50.0)),
)
def test_crossing_year_monotone_in_multiplier(peaks, multipliers):
    series = {2019 + i: v for i, v in enumerate(peaks)}
    small, large = sorted(multipliers)
    first = capacity_crossing_year(series, 2019, CapacityAssumption("small", small))
    second = capacity_crossing_year(series, 2019, CapacityAssumption("large", large))
    if second is not None:
        assert first is not None and first <= second


if __name__ == "__main__":
    test_crossing_year()
    test_crossing_preconditions()
    test_sweep_ordering()
    print("\nAll capacity tests completed!")
