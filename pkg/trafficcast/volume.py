"""
Per-application daily user volumes and their allocation over the day.

Volumes are GB/day per device (GB = 10^9 bytes). Low-activity machine
applications carry no user volume.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import ParameterError
from .profile import HOURS, PER_KM2, SHARE, HourlyProfile

logger = logging.getLogger(__name__)

HUMAN = "human"
MACHINE_LOW = "machine_low_activity"
MACHINE_HIGH = "machine_high_activity"
HIGH_PRIORITY = "high_priority"
CATEGORIES = (HUMAN, MACHINE_LOW, MACHINE_HIGH, HIGH_PRIORITY)

# 10 Mbps stream for one hour
HD_RATE_GB_PER_HOUR = 4.5


def exponential_volume(base, base_year, cagr, year):
    if base < 0:
        raise ParameterError("Base volume must be non-negative")
    if not cagr > -1:
        raise ParameterError("CAGR must exceed -1")
    return base * (1.0 + cagr) ** (year - base_year)


def ceiling_linear_volume(base, base_year, ceiling, ceiling_year, year):
    if ceiling < base:
        raise ParameterError("Ceiling volume must not be below the base volume")
    if not ceiling_year > base_year:
        raise ParameterError("Ceiling year must follow the base year")
    progress = min(max((year - base_year) / (ceiling_year - base_year), 0.0), 1.0)
    return base + (ceiling - base) * progress


def camera_daily_volume(year, daily_hours_delta, hd_rate=HD_RATE_GB_PER_HOUR, base_hours=7.0, first_year=2023):
    """HD footage hours grow by daily_hours_delta per year from base_hours; may exceed 24"""
    if year < first_year:
        return 0.0
    hours = base_hours + (year - (first_year - 1)) * daily_hours_delta
    return hours * hd_rate


def constant_volume(value):
    if value < 0:
        raise ParameterError(f"Constant volume must be non-negative, got {value}")
    return float(value)


# --- growth parameter variants ------------------------------------------

@dataclass(frozen=True)
class ExponentialGrowth:
    base: float
    base_year: int
    cagr: float
    start_year: Optional[int] = None

    def __post_init__(self):
        exponential_volume(self.base, self.base_year, self.cagr, self.base_year)

    def volume(self, year):
        if self.start_year is not None and year < self.start_year:
            return 0.0
        # held at base before base_year
        return exponential_volume(self.base, self.base_year, self.cagr, max(year, self.base_year))


@dataclass(frozen=True)
class CeilingLinearGrowth:
    base: float
    base_year: int
    ceiling: float
    ceiling_year: int
    start_year: Optional[int] = None

    def __post_init__(self):
        ceiling_linear_volume(self.base, self.base_year, self.ceiling, self.ceiling_year, self.base_year)

    def volume(self, year):
        if self.start_year is not None and year < self.start_year:
            return 0.0
        return ceiling_linear_volume(self.base, self.base_year, self.ceiling, self.ceiling_year, year)


@dataclass(frozen=True)
class ConstantGrowth:
    value: float
    start_year: Optional[int] = None

    def __post_init__(self):
        constant_volume(self.value)

    def volume(self, year):
        if self.start_year is not None and year < self.start_year:
            return 0.0
        return constant_volume(self.value)


@dataclass(frozen=True)
class CameraHoursGrowth:
    daily_hours_delta: float
    hd_rate: float = HD_RATE_GB_PER_HOUR
    base_hours: float = 7.0
    first_year: int = 2023

    def __post_init__(self):
        if self.daily_hours_delta < 0 or self.hd_rate < 0 or self.base_hours < 0:
            raise ParameterError("Camera hours and rate must be non-negative")

    def volume(self, year):
        return camera_daily_volume(year, self.daily_hours_delta, self.hd_rate, self.base_hours, self.first_year)


@dataclass(frozen=True)
class NoVolume:
    def volume(self, year):
        return 0.0


GROWTH_MODELS = {
    "exponential": ExponentialGrowth,
    "ceiling_linear": CeilingLinearGrowth,
    "constant": ConstantGrowth,
    "camera_hours": CameraHoursGrowth,
    "none": NoVolume,
}


def _growth_to_dict(params):
    return {k: v for k, v in asdict(params).items() if v is not None}


# --- activity ------------------------------------------------------------

@dataclass(frozen=True)
class ActivityModel:
    """
    How a daily volume spreads over the day.

    usage_profile: share-tagged profile named by profile_id.
    uniform_over_active_hours: volume / active_hours inside the window when
    one is given. Without a window each device is active for active_hours a
    day at hours following the bound presence profile.
    uniform_24h: volume / 24.
    """
    kind: str
    profile_id: Optional[str] = None
    active_hours: Optional[float] = None
    window: Optional[Tuple[int, int]] = None

    KINDS = ("usage_profile", "uniform_over_active_hours", "uniform_24h")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ParameterError(f"Unknown activity model: {self.kind}")
        if self.kind == "usage_profile" and not self.profile_id:
            raise ParameterError("usage_profile activity needs a profile_id")
        if self.kind == "uniform_over_active_hours":
            if not self.active_hours or self.active_hours <= 0:
                raise ParameterError("uniform_over_active_hours needs positive active_hours")
            if self.window is not None:
                start, end = self.window
                if not 0 <= start < end <= HOURS:
                    raise ParameterError(f"Operating window {self.window} outside 0-24h")
                if end - start != self.active_hours:
                    raise ParameterError("Operating window length must equal active_hours")

    def to_dict(self):
        data = {"kind": self.kind}
        if self.profile_id is not None:
            data["profile_id"] = self.profile_id
        if self.active_hours is not None:
            data["active_hours"] = self.active_hours
        if self.window is not None:
            data["window"] = list(self.window)
        return data

    @staticmethod
    def from_dict(data):
        window = data.get("window")
        return ActivityModel(
            kind=data["kind"],
            profile_id=data.get("profile_id"),
            active_hours=data.get("active_hours"),
            window=tuple(window) if window is not None else None,
        )


def allocate_hourly(volume, activity: ActivityModel, profiles=None, weights=None) -> HourlyProfile:
    """
    Hourly allocation of a daily volume; always sums to the volume.

    A windowless active-hour model follows `weights` (any non-negative
    24-slot series, normalized here), uniform over the day when none given.
    """
    if activity.kind == "usage_profile":
        profile = (profiles or {}).get(activity.profile_id)
        if profile is None:
            raise ParameterError(f"Unknown usage profile: {activity.profile_id}")
        if profile.unit != SHARE or abs(profile.total() - 1.0) > 1e-9:
            raise ParameterError(f"Usage profile '{activity.profile_id}' is not normalized")
        return HourlyProfile(volume * profile.values, PER_KM2)
    if activity.kind == "uniform_24h":
        return HourlyProfile.constant(volume / HOURS)
    if activity.window is not None:
        mask = np.zeros(HOURS, dtype=bool)
        mask[activity.window[0]:activity.window[1]] = True
        return HourlyProfile(np.where(mask, volume / activity.active_hours, 0.0))
    if weights is None:
        return HourlyProfile.constant(volume / HOURS)
    raw = weights.values if isinstance(weights, HourlyProfile) else weights
    return HourlyProfile(volume * HourlyProfile.share_of(raw).values)


# --- applications ---------------------------------------------------------

class ApplicationSpec:
    def __init__(self, app_id, device_id, traffic_category, growth_model, variants, activity):
        if traffic_category not in CATEGORIES:
            raise ParameterError(f"Application '{app_id}' has unknown traffic category '{traffic_category}'")
        if growth_model not in GROWTH_MODELS:
            raise ParameterError(f"Application '{app_id}' has unknown growth model '{growth_model}'")
        self.app_id = app_id
        self.device_id = device_id
        self.traffic_category = traffic_category
        self.growth_model = growth_model
        self.variants = dict(variants) or {"medium": NoVolume()}
        self.activity = activity

    def resolve_kind(self, estimate):
        if estimate in self.variants:
            return estimate
        if "medium" in self.variants:
            return "medium"
        raise ParameterError(f"Application '{self.app_id}' has no '{estimate}' variant")

    def daily_volume(self, year, estimate):
        if self.traffic_category == MACHINE_LOW:
            return 0.0
        return self.variants[self.resolve_kind(estimate)].volume(year)

    def to_dict(self):
        data = {
            "app_id": self.app_id,
            "category": self.traffic_category,
            "growth_model": self.growth_model,
            "activity": self.activity.to_dict(),
        }
        if self.growth_model != "none":
            data["growth"] = {kind: _growth_to_dict(p) for kind, p in sorted(self.variants.items())}
        return data

    @staticmethod
    def from_dict(data, device_id):
        model = data.get("growth_model", "none")
        if model not in GROWTH_MODELS:
            raise ParameterError(f"Application '{data.get('app_id')}' has unknown growth model '{model}'")
        builder = GROWTH_MODELS[model]
        variants = {kind: builder(**params) for kind, params in data.get("growth", {}).items()}
        activity = ActivityModel.from_dict(data.get("activity", {"kind": "uniform_24h"}))
        return ApplicationSpec(data["app_id"], device_id, data.get("category"), model, variants, activity)

    def __eq__(self, other):
        if not isinstance(other, ApplicationSpec):
            return NotImplemented
        return self.to_dict() == other.to_dict() and self.device_id == other.device_id


def device_daily_volume(device, year, estimate):
    """Sum of the device's application volumes, GB/day"""
    return sum(app.daily_volume(year, estimate) for app in device.applications)
