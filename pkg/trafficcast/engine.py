"""
TrafficEngine ties the pipeline together: config -> urban densities ->
forecast -> control indicators -> capacity timing.
"""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from typing import Dict, Optional

from .audit import Manifest, fingerprint_dict
from .capacity import CrossingReport, sweep
from .config import ScenarioConfig
from .control import ControlIndicators, control_series
from .errors import ParameterError
from .forecast import ForecastResult, forecast, peak_hour

logger = logging.getLogger(__name__)


class TrafficEngine:
    def __init__(self, config: ScenarioConfig, crossings=None):
        self.config = config
        self.densities = config.urban_densities(crossings)
        self.profiles = config.profiles()
        self._results = {}

    def forecast(self, scenario_name, years=None) -> ForecastResult:
        years = list(years or self.config.years)
        key = (scenario_name, tuple(years))
        if key not in self._results:
            scenario = self.config.resolve_scenario(scenario_name)
            self._results[key] = forecast(self.config.devices, scenario, years, self.densities, self.profiles)
            logger.info("Forecast '%s' over %d-%d: %.0f GB/km2/day in the last year",
                        scenario_name, years[0], years[-1], self._results[key].daily_total(years[-1]))
        return self._results[key]

    def control(self, result: ForecastResult) -> ControlIndicators:
        return control_series(result, self.config.devices, self.densities, self.config.control)

    @staticmethod
    def peak_series(result: ForecastResult) -> Dict[int, float]:
        return {year: peak_hour(result, year).volume for year in result.years}

    def capacity(self, results) -> Optional[CrossingReport]:
        """Sweep the configured assumptions; None when the baseline peak is absent or zero"""
        baseline = self.config.baseline_year
        series = {result.scenario.name: self.peak_series(result) for result in results}
        if any(baseline not in s or s[baseline] <= 0 for s in series.values()):
            logger.warning("No positive baseline peak in %d, capacity timing skipped", baseline)
            return None
        return sweep(series, self.config.capacity, baseline)


@dataclass
class RunOutputs:
    result: ForecastResult
    indicators: ControlIndicators
    crossings: Optional[CrossingReport]
    resolved: dict
    manifest: Manifest


def run_forecast(config: ScenarioConfig, scenario_name, out_dir=None, years=None, engine=None) -> RunOutputs:
    """Forecast, control and capacity for one scenario; writes CSVs, the resolved-parameter echo and a manifest"""
    from .report import resolved_parameters, write_csv, write_json

    engine = engine or TrafficEngine(config)
    years = list(years or config.years)
    if not years:
        raise ParameterError("Empty forecast horizon")
    result = engine.forecast(scenario_name, years)
    indicators = engine.control(result)
    crossings = engine.capacity([result])
    resolved = resolved_parameters(config, result)
    manifest = Manifest(fingerprint_dict(config.to_dict()), scenario_name, years)

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        written = [
            write_csv(result.to_frame(), os.path.join(out_dir, f"forecast_{scenario_name}.csv")),
            write_csv(indicators.to_frame(), os.path.join(out_dir, f"control_{scenario_name}.csv")),
            write_json(resolved, os.path.join(out_dir, f"resolved_{scenario_name}.json")),
        ]
        if crossings is not None:
            written.append(write_csv(crossings.to_frame(), os.path.join(out_dir, f"capacity_{scenario_name}.csv")))
        for path in written:
            manifest.add(path, out_dir)
        manifest.write(out_dir)
    return RunOutputs(result, indicators, crossings, resolved, manifest)
