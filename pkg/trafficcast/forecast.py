"""
Forecast composition.

Device density d_i(h) = penetration_i(year) * u_i(h); hourly user volume
w(h) = sum_i d_i(h) * t_i(h) with t_i the hourly allocation of each
application's daily volume. Devices are summed in ascending id order, then
applications, then hours.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
import pandas as pd

from .control import ControlRole
from .diffusion import HIGH, LOW, MEDIUM, PenetrationSource
from .errors import ConfigError, DomainError, ParameterError
from .profile import HOURS, HourlyProfile
from .volume import CATEGORIES, ApplicationSpec, allocate_hourly

logger = logging.getLogger(__name__)

ADOPTING_BODIES = ("population", "stock", "area", "buildings", "retailers")


class DeviceSpec:
    def __init__(self, device_id, adopting_body, penetration, density_binding, applications=None, control=None):
        if adopting_body not in ADOPTING_BODIES:
            raise ParameterError(f"Device '{device_id}' has unknown adopting body '{adopting_body}'")
        self.device_id = device_id
        self.adopting_body = adopting_body
        self.penetration = penetration
        self.density_binding = density_binding
        self.applications = sorted(applications or [], key=lambda app: app.app_id)
        self.control = control or ControlRole()

    def to_dict(self):
        return {
            "id": self.device_id,
            "adopting_body": self.adopting_body,
            "penetration": self.penetration.to_dict(),
            "density_binding": self.density_binding,
            "applications": [app.to_dict() for app in self.applications],
            "control": self.control.to_dict(),
        }

    @staticmethod
    def from_dict(data):
        device_id = data["id"]
        return DeviceSpec(
            device_id,
            data.get("adopting_body"),
            PenetrationSource.from_dict(data["penetration"]),
            data.get("density_binding"),
            [ApplicationSpec.from_dict(app, device_id) for app in data.get("applications", [])],
            ControlRole.from_dict(data.get("control", {})),
        )

    def __eq__(self, other):
        if not isinstance(other, DeviceSpec):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __repr__(self):
        return f"DeviceSpec({self.device_id!r}, binding={self.density_binding!r})"


@dataclass
class Scenario:
    """
    Estimate selection: `default` applies everywhere unless a device, an
    application ("device.app") or the control schedules override it.
    """
    name: str
    default: str = LOW
    devices: Dict[str, str] = field(default_factory=dict)
    applications: Dict[str, str] = field(default_factory=dict)
    control: Optional[str] = None

    def __post_init__(self):
        for value in [self.default, self.control, *self.devices.values(), *self.applications.values()]:
            if value is not None and value not in (LOW, HIGH, MEDIUM):
                raise ParameterError(f"Scenario '{self.name}' selects unknown estimate '{value}'")

    @classmethod
    def slow(cls):
        return cls("slow", LOW)

    @classmethod
    def rapid(cls):
        return cls("rapid", HIGH)

    def device_estimate(self, device_id):
        return self.devices.get(device_id, self.default)

    def application_estimate(self, device_id, app_id):
        return self.applications.get(f"{device_id}.{app_id}", self.default)

    def control_estimate(self):
        return self.control or self.default

    def to_dict(self):
        return {
            "name": self.name,
            "default": self.default,
            "devices": dict(sorted(self.devices.items())),
            "applications": dict(sorted(self.applications.items())),
            "control": self.control_estimate(),
        }


class ForecastResult:
    """
    volume: (year, application, hour) in GB/km2, applications keyed by
    (device_id, app_id); density: (year, device, hour) in devices/km2.
    """

    def __init__(self, scenario, years, device_ids, app_keys, app_categories, volume, density,
                 penetration, daily_volume):
        self.scenario = scenario
        self.years = list(years)
        self.device_ids = list(device_ids)
        self.app_keys = list(app_keys)
        self.app_categories = list(app_categories)
        self.volume = volume
        self.density = density
        self.penetration = penetration
        self.daily_volume = daily_volume

    @property
    def scenario_name(self):
        return self.scenario.name

    def year_index(self, year):
        try:
            return self.years.index(int(year))
        except ValueError:
            raise ParameterError(f"Year {year} outside the forecast horizon") from None

    def hourly_totals(self, year):
        return self.volume[self.year_index(year)].sum(axis=0) if self.app_keys else np.zeros(HOURS)

    def hourly_density(self, year):
        return self.density[self.year_index(year)].sum(axis=0) if self.device_ids else np.zeros(HOURS)

    def category_totals(self, year):
        idx = self.year_index(year)
        totals = {}
        for category in CATEGORIES:
            rows = [i for i, c in enumerate(self.app_categories) if c == category]
            totals[category] = float(self.volume[idx, rows].sum()) if rows else 0.0
        return totals

    def daily_total(self, year):
        return sum(self.category_totals(year).values())

    def daily_totals(self):
        return {year: self.daily_total(year) for year in self.years}

    def application_daily(self, year, device_id, app_id):
        idx = self.year_index(year)
        return float(self.volume[idx, self.app_keys.index((device_id, app_id))].sum())

    def application_hourly(self, year, device_id, app_id):
        return self.volume[self.year_index(year), self.app_keys.index((device_id, app_id))]

    def device_density(self, year, device_id):
        return self.density[self.year_index(year), self.device_ids.index(device_id)]

    def to_frame(self):
        """Long format, ordered year, device, application, hour"""
        rows = []
        name = self.scenario.name
        for y, year in enumerate(self.years):
            for a, (device_id, app_id) in enumerate(self.app_keys):
                density = self.density[y, self.device_ids.index(device_id)]
                volume = self.volume[y, a]
                category = self.app_categories[a]
                for hour in range(HOURS):
                    rows.append((year, name, device_id, app_id, category, hour, volume[hour], density[hour]))
        return pd.DataFrame(rows, columns=[
            "year", "scenario", "device", "application", "category", "hour",
            "volume_gb_km2", "density_per_km2",
        ])


def device_density(penetration, u: HourlyProfile) -> HourlyProfile:
    if penetration < 0:
        raise ParameterError("Penetration must be non-negative")
    return HourlyProfile(penetration * u.values)


def _application_volume(app, pen, presence: HourlyProfile, volumes, density, profiles):
    """(year, hour) volume of one application"""
    activity = app.activity
    if activity.kind == "uniform_over_active_hours" and activity.window is None:
        present = presence.total()
        if present <= 0:
            return np.zeros((len(volumes), HOURS))
        # devices served per day, each active for active_hours
        served = pen * present / activity.active_hours
        template = allocate_hourly(1.0, activity, profiles, weights=presence).values
        return (served * volumes)[:, None] * template[None, :]
    template = allocate_hourly(1.0, activity, profiles).values
    return density * (volumes[:, None] * template[None, :])


def forecast(registry, scenario: Scenario, years, densities, profiles=None) -> ForecastResult:
    years = [int(y) for y in years]
    devices = sorted(registry, key=lambda d: d.device_id)
    device_ids = [d.device_id for d in devices]
    if len(set(device_ids)) != len(device_ids):
        raise ConfigError("Duplicate device ids in registry")

    app_keys, app_categories, rows = [], [], []
    density = np.zeros((len(years), len(devices), HOURS))
    penetration, daily_volume = {}, {}

    for i, device in enumerate(devices):
        if device.density_binding not in densities:
            raise ConfigError(f"Device '{device.device_id}' binds unknown density '{device.density_binding}'")
        presence = densities[device.density_binding]
        u = presence.values
        series = device.penetration.series(scenario.device_estimate(device.device_id), years, device.device_id)
        pen = series.as_array()
        penetration[device.device_id] = dict(zip(years, pen.tolist()))
        density[:, i, :] = pen[:, None] * u[None, :]

        for app in device.applications:
            if app.traffic_category not in CATEGORIES:
                raise ConfigError(f"Application '{device.device_id}.{app.app_id}' has no traffic category")
            estimate = scenario.application_estimate(device.device_id, app.app_id)
            volumes = np.array([app.daily_volume(year, estimate) for year in years])
            rows.append(_application_volume(app, pen, presence, volumes, density[:, i, :], profiles))
            app_keys.append((device.device_id, app.app_id))
            app_categories.append(app.traffic_category)
            daily_volume[(device.device_id, app.app_id)] = dict(zip(years, volumes.tolist()))

    volume = np.stack(rows, axis=1) if rows else np.zeros((len(years), 0, HOURS))
    logger.debug("Forecast '%s': %d devices, %d applications, %d years",
                 scenario.name, len(devices), len(app_keys), len(years))
    return ForecastResult(scenario, years, device_ids, app_keys, app_categories, volume, density,
                          penetration, daily_volume)


def category_rollup(result: ForecastResult):
    """Per-category daily totals and shares for every year"""
    rollup = {category: {"totals": {}, "shares": {}} for category in CATEGORIES}
    for category in result.app_categories:
        if category not in CATEGORIES:
            raise ConfigError(f"Untagged application category: {category}")
    for year in result.years:
        totals = result.category_totals(year)
        grand = sum(totals.values())
        for category, value in totals.items():
            rollup[category]["totals"][year] = value
            rollup[category]["shares"][year] = value / grand if grand > 0 else 0.0
    return rollup


@dataclass(frozen=True)
class PeakHour:
    hour: int
    volume: float
    share: float


def peak_hour(result: ForecastResult, year) -> PeakHour:
    hourly = result.hourly_totals(year)
    hour = int(np.argmax(hourly))  # lowest index wins ties
    total = result.daily_total(year)
    return PeakHour(hour, float(hourly[hour]), float(hourly[hour]) / total if total > 0 else 0.0)


def cagr(v_start, v_end, years):
    if v_start <= 0:
        raise DomainError(f"CAGR needs a positive start value, got {v_start}")
    if years < 1:
        raise DomainError("CAGR needs at least one year")
    return (v_end / v_start) ** (1.0 / years) - 1.0


@dataclass
class DensitySummary:
    total: float
    per_device: Dict[str, float]


def median_density(result: ForecastResult, year) -> DensitySummary:
    idx = result.year_index(year)
    per_device = {d: float(np.median(result.density[idx, i])) for i, d in enumerate(result.device_ids)}
    return DensitySummary(float(np.median(result.hourly_density(year))), per_device)


def peak_density(result: ForecastResult, year):
    """Device densities at the volume peak hour"""
    hour = peak_hour(result, year).hour
    idx = result.year_index(year)
    per_device = {d: float(result.density[idx, i, hour]) for i, d in enumerate(result.device_ids)}
    return DensitySummary(sum(per_device.values()), per_device)
