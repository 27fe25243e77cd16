"""
Macro-layer capacity timing: the first year the peak-hour volume outgrows a
multiple of the baseline-year peak.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional

import pandas as pd

from .errors import ParameterError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CapacityAssumption:
    name: str
    multiplier: float

    def __post_init__(self):
        if not self.multiplier > 0:
            raise ParameterError(f"Capacity multiplier of '{self.name}' must be positive")

    def to_dict(self):
        return {"name": self.name, "multiplier": self.multiplier}

    @staticmethod
    def from_dict(data):
        return CapacityAssumption(data["name"], float(data["multiplier"]))


def capacity_crossing_year(peak_series: Dict[int, float], baseline_year, assumption: CapacityAssumption) -> Optional[int]:
    """Smallest year whose peak reaches multiplier x baseline peak, or None within the horizon"""
    if baseline_year not in peak_series:
        raise ParameterError(f"Baseline year {baseline_year} missing from the peak series")
    baseline = peak_series[baseline_year]
    if not baseline > 0:
        raise ParameterError(f"Baseline peak must be positive, got {baseline}")
    threshold = assumption.multiplier * baseline
    for year in sorted(y for y in peak_series if y >= baseline_year):
        if peak_series[year] >= threshold:
            return year
    return None


@dataclass(frozen=True)
class Crossing:
    scenario: str
    assumption: str
    multiplier: float
    year: Optional[int]


class CrossingReport:
    def __init__(self, crossings: List[Crossing], baseline_year):
        self.baseline_year = baseline_year
        self.crossings = sorted(crossings, key=lambda c: (c.multiplier, c.assumption, c.scenario))

    def __len__(self):
        return len(self.crossings)

    def __iter__(self):
        return iter(self.crossings)

    def year(self, scenario, assumption_name):
        for crossing in self.crossings:
            if crossing.scenario == scenario and crossing.assumption == assumption_name:
                return crossing.year
        raise KeyError((scenario, assumption_name))

    def to_frame(self):
        return pd.DataFrame(
            [(c.scenario, c.assumption, c.multiplier, "" if c.year is None else c.year) for c in self.crossings],
            columns=["scenario", "assumption", "multiplier", "crossing_year"],
        )


def sweep(peak_series_by_scenario: Dict[str, Dict[int, float]], assumptions, baseline_year) -> CrossingReport:
    crossings = []
    for scenario in sorted(peak_series_by_scenario):
        series = peak_series_by_scenario[scenario]
        for assumption in assumptions:
            year = capacity_crossing_year(series, baseline_year, assumption)
            crossings.append(Crossing(scenario, assumption.name, assumption.multiplier, year))
            logger.debug("Capacity %s x%.1f (%s): %s", assumption.name, assumption.multiplier, scenario, year)
    return CrossingReport(crossings, baseline_year)
