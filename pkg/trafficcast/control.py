"""
Peak-hour control traffic: attachment requests from low-activity devices and
handovers of moving high-activity devices.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional

import pandas as pd

from .errors import ParameterError

logger = logging.getLogger(__name__)

ATTACHMENT = "attachment"
HANDOVER = "handover"
NO_ROLE = "none"
ROLES = (ATTACHMENT, HANDOVER, NO_ROLE)


@dataclass(frozen=True)
class ControlRole:
    """Which indicator a device feeds; density_binding overrides the device's own binding"""
    role: str = NO_ROLE
    speed_kmh: Optional[float] = None
    density_binding: Optional[str] = None

    def __post_init__(self):
        if self.role not in ROLES:
            raise ParameterError(f"Unknown control role: {self.role}")
        if self.role == HANDOVER and not (self.speed_kmh and self.speed_kmh > 0):
            raise ParameterError("Handover devices need a positive speed")

    def to_dict(self):
        data = {"role": self.role}
        if self.speed_kmh is not None:
            data["speed_kmh"] = self.speed_kmh
        if self.density_binding is not None:
            data["density_binding"] = self.density_binding
        return data

    @staticmethod
    def from_dict(data):
        return ControlRole(data.get("role", NO_ROLE), data.get("speed_kmh"), data.get("density_binding"))


@dataclass(frozen=True)
class DecliningSchedule:
    """Constant until anchor_year, linear to target_value at target_year, flat after"""
    anchor_year: int
    anchor_value: float
    target_year: int
    target_value: float

    def __post_init__(self):
        if not (self.anchor_value > 0 and self.target_value > 0):
            raise ParameterError("Schedule values must be positive")
        if self.target_value > self.anchor_value:
            raise ParameterError("Schedule must be non-increasing (bottom-limited decreasing or constant)")
        if not self.target_year > self.anchor_year:
            raise ParameterError("Schedule target year must follow its anchor year")

    def value(self, year):
        progress = min(max((year - self.anchor_year) / (self.target_year - self.anchor_year), 0.0), 1.0)
        return self.anchor_value + (self.target_value - self.anchor_value) * progress

    def to_dict(self):
        return {
            "anchor_year": self.anchor_year,
            "anchor_value": self.anchor_value,
            "target_year": self.target_year,
            "target_value": self.target_value,
        }

    @staticmethod
    def from_dict(data):
        return DecliningSchedule(int(data["anchor_year"]), float(data["anchor_value"]),
                                 int(data["target_year"]), float(data["target_value"]))


@dataclass
class ControlParams:
    """
    t_r_min: minimum inter-request time (h). inter_request and
    inter_site_distance map an estimate kind to its schedule (h and km);
    device_inter_request overrides the generic schedule per device.
    speeds holds s_i in km/h.
    """
    inter_request: Dict[str, DecliningSchedule]
    inter_site_distance: Dict[str, DecliningSchedule]
    t_r_min: float = 0.25
    speeds: Dict[str, float] = field(default_factory=dict)
    device_inter_request: Dict[str, Dict[str, DecliningSchedule]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.t_r_min > 0:
            raise ParameterError("t_r_min must be positive")

    def _pick(self, schedules, estimate, label):
        if estimate in schedules:
            return schedules[estimate]
        if "medium" in schedules:
            return schedules["medium"]
        raise ParameterError(f"No '{estimate}' {label} schedule")

    def inter_request_time(self, device_id, year, estimate):
        schedules = self.device_inter_request.get(device_id, self.inter_request)
        return self._pick(schedules, estimate, "inter-request").value(year)

    def site_distance(self, year, estimate):
        return self._pick(self.inter_site_distance, estimate, "inter-site distance").value(year)

    def to_dict(self):
        return {
            "t_r_min": self.t_r_min,
            "inter_request": {k: s.to_dict() for k, s in sorted(self.inter_request.items())},
            "inter_site_distance": {k: s.to_dict() for k, s in sorted(self.inter_site_distance.items())},
            "device_inter_request": {
                d: {k: s.to_dict() for k, s in sorted(v.items())}
                for d, v in sorted(self.device_inter_request.items())
            },
        }

    @staticmethod
    def from_dict(data, speeds=None):
        return ControlParams(
            inter_request={k: DecliningSchedule.from_dict(v) for k, v in data["inter_request"].items()},
            inter_site_distance={k: DecliningSchedule.from_dict(v) for k, v in data["inter_site_distance"].items()},
            t_r_min=float(data.get("t_r_min", 0.25)),
            speeds=dict(speeds or {}),
            device_inter_request={
                d: {k: DecliningSchedule.from_dict(s) for k, s in v.items()}
                for d, v in data.get("device_inter_request", {}).items()
            },
        )


def attachment_contributions(densities_at_peak, params: ControlParams, year, estimate="low"):
    """Requests/h/km2 per low-activity device"""
    contributions = {}
    for device_id in sorted(densities_at_peak):
        t_r = params.inter_request_time(device_id, year, estimate)
        if t_r < params.t_r_min:
            raise ParameterError(
                f"Inter-request time {t_r} h of '{device_id}' is below t_r_min {params.t_r_min} h"
            )
        alpha = params.t_r_min / t_r  # chance of one attachment per t_r_min window
        contributions[device_id] = densities_at_peak[device_id] * alpha / params.t_r_min
    return contributions


def attachment_rate(densities_at_peak, params: ControlParams, year, estimate="low"):
    return sum(attachment_contributions(densities_at_peak, params, year, estimate).values())


def handover_contributions(densities_at_peak, params: ControlParams, year, estimate="low"):
    """Handovers/h/km2 per moving high-activity device"""
    if not densities_at_peak:
        return {}
    distance = params.site_distance(year, estimate)
    if not distance > 0:
        raise ParameterError("Inter-site distance must be positive")
    speeds = {}
    for device_id in densities_at_peak:
        speed = params.speeds.get(device_id)
        if not speed or speed <= 0:
            raise ParameterError(f"Handover device '{device_id}' needs a positive speed")
        speeds[device_id] = speed
    t_h_min = distance / max(speeds.values())
    contributions = {}
    for device_id in sorted(densities_at_peak):
        beta = t_h_min * speeds[device_id] / distance
        contributions[device_id] = densities_at_peak[device_id] * beta / t_h_min
    return contributions


def handover_rate(densities_at_peak, params: ControlParams, year, estimate="low"):
    return sum(handover_contributions(densities_at_peak, params, year, estimate).values())


class ControlIndicators:
    UNITS = {ATTACHMENT: "requests/h/km2", HANDOVER: "handovers/h/km2"}

    def __init__(self, scenario_name):
        self.scenario_name = scenario_name
        self.peak_hours = {}
        self.attachment = {}
        self.handover = {}
        self.contributions = {ATTACHMENT: {}, HANDOVER: {}}
        self.low_activity_density = {}
        self.moving_density = {}
        self.moving_vehicle_density = {}

    @property
    def years(self):
        return sorted(self.attachment)

    def series(self, indicator):
        return self.attachment if indicator == ATTACHMENT else self.handover

    def growth(self, indicator, baseline_year, year):
        series = self.series(indicator)
        base = series[baseline_year]
        return series[year] / base if base > 0 else float("inf")

    def to_frame(self):
        devices = sorted({d for per_year in self.contributions.values() for c in per_year.values() for d in c})
        rows = []
        for year in self.years:
            for indicator in (ATTACHMENT, HANDOVER):
                contribution = self.contributions[indicator][year]
                row = {
                    "year": year,
                    "scenario": self.scenario_name,
                    "indicator": indicator,
                    "value": self.series(indicator)[year],
                    "unit": self.UNITS[indicator],
                }
                row.update({f"contrib_{d}": contribution.get(d, 0.0) for d in devices})
                rows.append(row)
        return pd.DataFrame(rows)


def control_series(result, registry, densities, params: ControlParams) -> ControlIndicators:
    """Evaluate both indicators at each year's volume peak hour"""
    from .forecast import peak_hour

    estimate = result.scenario.control_estimate()
    indicators = ControlIndicators(result.scenario.name)
    devices = sorted(registry, key=lambda d: d.device_id)
    for year in result.years:
        hour = peak_hour(result, year).hour
        at_peak = {ATTACHMENT: {}, HANDOVER: {}}
        vehicles = 0.0
        for device in devices:
            role = device.control
            if role.role == NO_ROLE:
                continue
            binding = role.density_binding or device.density_binding
            density = result.penetration[device.device_id][year] * densities[binding][hour]
            at_peak[role.role][device.device_id] = density
            if role.role == HANDOVER and binding != "moving_population":
                vehicles += density
        attach = attachment_contributions(at_peak[ATTACHMENT], params, year, estimate)
        hand = handover_contributions(at_peak[HANDOVER], params, year, estimate)
        indicators.peak_hours[year] = hour
        indicators.contributions[ATTACHMENT][year] = attach
        indicators.contributions[HANDOVER][year] = hand
        indicators.attachment[year] = sum(attach.values())
        indicators.handover[year] = sum(hand.values())
        indicators.low_activity_density[year] = sum(at_peak[ATTACHMENT].values())
        indicators.moving_density[year] = sum(at_peak[HANDOVER].values())
        indicators.moving_vehicle_density[year] = vehicles
    logger.debug("Control series '%s' over %d years", result.scenario.name, len(result.years))
    return indicators
