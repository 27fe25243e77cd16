"""
Static and hour-of-day urban densities.

Census facts of the study area combine with cordon-crossing counts into the
included-people pattern, from which the active, working, non-working and
moving populations follow, plus moving car, bus and bike densities. Every
profile is a density in 1/km2; absolute counts only appear in reports.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np
import pandas as pd

from .errors import (
    DegeneratePatternError,
    InconsistentAreaError,
    InconsistentParametersError,
    ParameterError,
)
from .profile import HOURS, PATTERN, PER_KM2, HourlyProfile

logger = logging.getLogger(__name__)

# hours [0, 14) receive commuters, hours [14, 24) send them home
INFLOW_HOURS = range(0, 14)
OUTFLOW_HOURS = range(14, HOURS)
DEFAULT_BALANCE_TOLERANCE = 0.01


@dataclass(frozen=True)
class AreaProfile:
    area_km2: float
    population_density: float
    resident_employed_density: float
    workplace_density: float
    service_workplace_fraction: float
    retailer_density: float
    building_density: float

    def __post_init__(self):
        if not self.area_km2 > 0:
            raise InconsistentAreaError(f"area_km2 must be positive, got {self.area_km2}")
        for name in ("population_density", "resident_employed_density", "workplace_density",
                     "retailer_density", "building_density"):
            if getattr(self, name) < 0:
                raise InconsistentAreaError(f"{name} must be non-negative")
        if self.resident_employed_density > self.population_density:
            raise InconsistentAreaError("resident_employed_density exceeds population_density")
        if not 0.0 <= self.service_workplace_fraction <= 1.0:
            raise InconsistentAreaError("service_workplace_fraction must be in [0, 1]")

    @property
    def workforce_deficit(self):
        """Workplaces filled from outside the area, per km2"""
        return self.workplace_density * self.service_workplace_fraction - self.resident_employed_density

    def to_dict(self):
        return asdict(self)

    @staticmethod
    def from_dict(data):
        return AreaProfile(**{k: float(v) for k, v in data.items()})


@dataclass(frozen=True)
class TransportParams:
    car_mode_share: float
    car_occupancy: float
    car_ownership_per_inhabitant: float
    bus_to_car_ratio: float
    bikes_per_inhabitant: float
    bike_mode_share: float

    def __post_init__(self):
        for name, value in asdict(self).items():
            if value < 0:
                raise ParameterError(f"{name} must be non-negative")
        for name in ("car_mode_share", "bike_mode_share", "bus_to_car_ratio"):
            if getattr(self, name) > 1:
                raise ParameterError(f"{name} must not exceed 1")
        if not self.car_occupancy > 0:
            raise ParameterError("car_occupancy must be positive")

    def to_dict(self):
        return asdict(self)

    @staticmethod
    def from_dict(data):
        return TransportParams(**{k: float(v) for k, v in data.items()})


class CrossingCounts:
    """Hourly crossings into and out of the cordon"""

    def __init__(self, inbound, outbound, balance_tolerance=DEFAULT_BALANCE_TOLERANCE):
        self.inbound = np.asarray(inbound, dtype=float)
        self.outbound = np.asarray(outbound, dtype=float)
        self.balance_tolerance = balance_tolerance
        for name, series in (("inbound", self.inbound), ("outbound", self.outbound)):
            if series.shape != (HOURS,):
                raise ParameterError(f"{name} crossings need {HOURS} hourly counts")
            if np.any(series < 0):
                raise ParameterError(f"{name} crossings must be non-negative")
        total_in, total_out = self.inbound.sum(), self.outbound.sum()
        if abs(total_in - total_out) > balance_tolerance * total_in:
            raise ParameterError(
                f"Crossings do not balance: inbound {total_in:.0f} vs outbound {total_out:.0f} "
                f"(tolerance {balance_tolerance:.1%})"
            )

    @classmethod
    def from_csv(cls, path, balance_tolerance=DEFAULT_BALANCE_TOLERANCE):
        frame = pd.read_csv(path)
        if list(frame.columns[:3]) != ["hour", "inbound", "outbound"]:
            raise ParameterError(f"{path}: expected header 'hour,inbound,outbound'")
        frame = frame.sort_values("hour")
        if frame["hour"].tolist() != list(range(HOURS)):
            raise ParameterError(f"{path}: hours must be exactly 0-23")
        return cls(frame["inbound"].to_numpy(), frame["outbound"].to_numpy(), balance_tolerance)

    def scaled(self, factor):
        return CrossingCounts(self.inbound * factor, self.outbound * factor, self.balance_tolerance)


@dataclass
class PopulationProfiles:
    active: HourlyProfile
    working: HourlyProfile
    non_working: HourlyProfile


def included_people_pattern(counts: CrossingCounts) -> HourlyProfile:
    cumulative = np.cumsum(counts.inbound - counts.outbound)
    spread = cumulative.max() - cumulative.min()
    if spread <= 0:
        raise DegeneratePatternError("Net crossings are identically zero, the included-people pattern is undefined")
    return HourlyProfile((cumulative - cumulative.min()) / spread, PATTERN)


def active_population(area: AreaProfile, pattern: HourlyProfile) -> PopulationProfiles:
    values = pattern.values
    if np.any(values < 0) or np.any(values > 1):
        raise ParameterError("Included-people pattern must lie in [0, 1]")
    working = area.workplace_density * area.service_workplace_fraction * values
    non_working = area.population_density - area.resident_employed_density * values
    if np.any(non_working < 0):
        raise InconsistentAreaError("Non-working population turns negative")
    return PopulationProfiles(
        active=HourlyProfile(working + non_working),
        working=HourlyProfile(working),
        non_working=HourlyProfile(non_working),
    )


def moving_population(active: HourlyProfile) -> HourlyProfile:
    return HourlyProfile(np.abs(active.values - np.roll(active.values, 1)))


def commuter_flow(commuters, counts: CrossingCounts):
    """Signed hourly flow: arrivals follow inbound crossings, departures outbound ones"""
    flow = np.zeros(HOURS)
    inbound = counts.inbound[list(INFLOW_HOURS)]
    outbound = counts.outbound[list(OUTFLOW_HOURS)]
    if commuters == 0:
        return flow
    if inbound.sum() <= 0 or outbound.sum() <= 0:
        raise InconsistentParametersError("Commuter flow needs inbound crossings before 14h and outbound after")
    flow[list(INFLOW_HOURS)] = commuters * inbound / inbound.sum()
    flow[list(OUTFLOW_HOURS)] = -commuters * outbound / outbound.sum()
    return flow


def vehicle_stock(resident, flow, label):
    stock = resident + np.cumsum(flow)
    if np.any(stock < 0):
        raise InconsistentParametersError(f"{label} stock turns negative")
    return stock


def _moving(stock):
    return np.abs(stock - np.roll(stock, 1))


def car_stock(area, counts, params, resident_cars=None) -> HourlyProfile:
    if area.workforce_deficit < 0:
        raise InconsistentParametersError("Workplaces filled from outside the area are negative")
    if resident_cars is None:
        resident_cars = params.car_ownership_per_inhabitant * area.population_density
    commuters = area.workforce_deficit * params.car_mode_share / params.car_occupancy
    return HourlyProfile(vehicle_stock(resident_cars, commuter_flow(commuters, counts), "Car"))


def moving_car_density(area, counts, params, resident_cars=None) -> HourlyProfile:
    return HourlyProfile(_moving(car_stock(area, counts, params, resident_cars).values))


def moving_bus_density(moving_cars: HourlyProfile, ratio) -> HourlyProfile:
    if ratio < 0:
        raise ParameterError("Bus to car ratio must be non-negative")
    return HourlyProfile(moving_cars.values * ratio)


def bike_stock(area, counts, params) -> HourlyProfile:
    # bike commutes count every worker, residents employed in the area included
    commuters = area.workplace_density * area.service_workplace_fraction * params.bike_mode_share
    resident_bikes = params.bikes_per_inhabitant * area.population_density
    return HourlyProfile(vehicle_stock(resident_bikes, commuter_flow(commuters, counts), "Bike"))


def moving_bike_density(area, counts, params) -> HourlyProfile:
    return HourlyProfile(_moving(bike_stock(area, counts, params).values))


class UrbanDensities:
    """Named density profiles a device can bind to"""

    BINDINGS = (
        "active_population",
        "working_population",
        "non_working_population",
        "moving_population",
        "moving_cars",
        "moving_buses",
        "moving_bikes",
        "population",
        "area",
        "buildings",
        "retailers",
    )

    def __init__(self, area: AreaProfile, counts: CrossingCounts, transport: TransportParams):
        self.area = area
        self.pattern = included_people_pattern(counts)
        people = active_population(area, self.pattern)
        cars = moving_car_density(area, counts, transport)
        self.car_stock = car_stock(area, counts, transport)
        self.bike_stock = bike_stock(area, counts, transport)
        self.profiles = {
            "active_population": people.active,
            "working_population": people.working,
            "non_working_population": people.non_working,
            "moving_population": moving_population(people.active),
            "moving_cars": cars,
            "moving_buses": moving_bus_density(cars, transport.bus_to_car_ratio),
            "moving_bikes": moving_bike_density(area, counts, transport),
            "population": HourlyProfile.constant(area.population_density),
            "area": HourlyProfile.constant(1.0),
            "buildings": HourlyProfile.constant(area.building_density),
            "retailers": HourlyProfile.constant(area.retailer_density),
        }
        logger.debug(
            "Urban densities: active peak %.0f/km2, mean moving cars %.1f/km2",
            people.active.values.max(), cars.mean(),
        )

    def __getitem__(self, binding):
        return self.profiles[binding]

    def __contains__(self, binding):
        return binding in self.profiles

    def to_frame(self):
        frame = pd.DataFrame({name: self.profiles[name].values for name in self.BINDINGS})
        frame.insert(0, "hour", range(HOURS))
        frame.insert(1, "included_pattern", self.pattern.values)
        frame["car_stock"] = self.car_stock.values
        frame["bike_stock"] = self.bike_stock.values
        return frame
