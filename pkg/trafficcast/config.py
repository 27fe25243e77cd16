"""
Scenario configuration: one JSON document describing the study area, the
device registry, usage profiles, control schedules, capacity assumptions,
policy levers and custom scenarios.
"""
from __future__ import annotations

import json
import logging
import os
from typing import Dict, List, Optional

from .capacity import CapacityAssumption
from .control import HANDOVER, ControlParams
from .diffusion import HIGH, LOW, MEDIUM
from .errors import ConfigError, TrafficcastError
from .forecast import DeviceSpec, Scenario
from .profile import SHARE, HourlyProfile
from .urban_density import DEFAULT_BALANCE_TOLERANCE, AreaProfile, CrossingCounts, TransportParams, UrbanDensities

logger = logging.getLogger(__name__)

BUILTIN_SCENARIOS = ("slow", "rapid")


class ProfileRef:
    """A named hourly profile stored in a CSV column"""

    def __init__(self, profile_id, path, column="share", unit=SHARE):
        self.profile_id = profile_id
        self.path = path
        self.column = column
        self.unit = unit

    def load(self, base_dir):
        return HourlyProfile.from_csv(os.path.join(base_dir, self.path), self.column, self.unit)

    def to_dict(self):
        return {"path": self.path, "column": self.column, "unit": self.unit}

    @staticmethod
    def from_dict(profile_id, data):
        return ProfileRef(profile_id, data["path"], data.get("column", "share"), data.get("unit", SHARE))


class ScenarioDefinition:
    """Custom scenario: default estimate, policy levers, then explicit overrides"""

    def __init__(self, name, default=LOW, policies=None, devices=None, applications=None, control=None):
        self.name = name
        self.default = default
        self.policies = dict(policies or {})
        self.devices = dict(devices or {})
        self.applications = dict(applications or {})
        self.control = control

    def to_dict(self):
        data = {"default": self.default}
        for key in ("policies", "devices", "applications"):
            if getattr(self, key):
                data[key] = dict(sorted(getattr(self, key).items()))
        if self.control is not None:
            data["control"] = self.control
        return data

    @staticmethod
    def from_dict(name, data):
        return ScenarioDefinition(
            name,
            data.get("default", LOW),
            data.get("policies"),
            data.get("devices"),
            data.get("applications"),
            data.get("control"),
        )


class ScenarioConfig:
    def __init__(self, name, start_year, end_year, baseline_year, area, transport, crossings_path,
                 profile_refs, devices, control, capacity, policies=None, scenarios=None,
                 balance_tolerance=DEFAULT_BALANCE_TOLERANCE, base_dir="."):
        self.name = name
        self.start_year = start_year
        self.end_year = end_year
        self.baseline_year = baseline_year
        self.area = area
        self.transport = transport
        self.crossings_path = crossings_path
        self.profile_refs = dict(profile_refs)
        self.devices = sorted(devices, key=lambda d: d.device_id)
        self.control = control
        self.capacity = list(capacity)
        self.policies = dict(policies or {})
        self.scenarios = dict(scenarios or {})
        self.balance_tolerance = balance_tolerance
        self.base_dir = base_dir
        self._profiles = None

    @property
    def years(self):
        return list(range(self.start_year, self.end_year + 1))

    def resolve_path(self, path):
        return os.path.join(self.base_dir, path)

    def profiles(self) -> Dict[str, HourlyProfile]:
        if self._profiles is None:
            self._profiles = {pid: ref.load(self.base_dir) for pid, ref in sorted(self.profile_refs.items())}
        return self._profiles

    def urban_densities(self, crossings=None) -> UrbanDensities:
        if crossings is None:
            crossings = CrossingCounts.from_csv(self.resolve_path(self.crossings_path), self.balance_tolerance)
        return UrbanDensities(self.area, crossings, self.transport)

    def device(self, device_id):
        for device in self.devices:
            if device.device_id == device_id:
                return device
        raise KeyError(device_id)

    def scenario_names(self):
        return list(BUILTIN_SCENARIOS) + sorted(self.scenarios)

    def resolve_scenario(self, name) -> Scenario:
        if name == "slow":
            return Scenario.slow()
        if name == "rapid":
            return Scenario.rapid()
        if name not in self.scenarios:
            raise ConfigError(f"Unknown scenario '{name}' (choose from {', '.join(self.scenario_names())})")
        definition = self.scenarios[name]
        devices, applications = {}, {}
        for policy, estimate in sorted(definition.policies.items()):
            targets = self.policies[policy]
            for device_id in targets.get("devices", []):
                devices[device_id] = estimate
            for app_key in targets.get("applications", []):
                applications[app_key] = estimate
        devices.update(definition.devices)
        applications.update(definition.applications)
        scenario = Scenario(name, definition.default, devices, applications, definition.control)
        logger.info("Scenario '%s' resolved: default %s, %d device and %d application overrides",
                    name, scenario.default, len(devices), len(applications))
        return scenario

    def to_dict(self):
        return {
            "name": self.name,
            "horizon": {"start": self.start_year, "end": self.end_year},
            "baseline_year": self.baseline_year,
            "area": self.area.to_dict(),
            "transport": self.transport.to_dict(),
            "crossings": self.crossings_path,
            "balance_tolerance": self.balance_tolerance,
            "profiles": {pid: ref.to_dict() for pid, ref in sorted(self.profile_refs.items())},
            "devices": [device.to_dict() for device in self.devices],
            "control": self.control.to_dict(),
            "capacity": [assumption.to_dict() for assumption in self.capacity],
            "policies": {name: targets for name, targets in sorted(self.policies.items())},
            "scenarios": {name: sc.to_dict() for name, sc in sorted(self.scenarios.items())},
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=4, sort_keys=True)

    @staticmethod
    def from_dict(data, base_dir="."):
        errors = []
        built = {}

        def section(key, builder):
            try:
                built[key] = builder()
            except KeyError as e:
                errors.append(f"{key}: missing field {e}")
            except (TrafficcastError, TypeError, ValueError) as e:
                errors.append(f"{key}: {e}")

        horizon = data.get("horizon", {})
        section("horizon", lambda: (int(horizon["start"]), int(horizon["end"])))
        section("area", lambda: AreaProfile.from_dict(data["area"]))
        section("transport", lambda: TransportParams.from_dict(data["transport"]))
        section("profiles", lambda: {
            pid: ProfileRef.from_dict(pid, ref) for pid, ref in data.get("profiles", {}).items()
        })
        section("capacity", lambda: [CapacityAssumption.from_dict(a) for a in data.get("capacity", [])])
        section("scenarios", lambda: {
            name: ScenarioDefinition.from_dict(name, sc) for name, sc in data.get("scenarios", {}).items()
        })

        devices = []
        for i, raw in enumerate(data.get("devices", [])):
            try:
                devices.append(DeviceSpec.from_dict(raw))
            except KeyError as e:
                errors.append(f"devices[{i}] ({raw.get('id', '?')}): missing field {e}")
            except (TrafficcastError, TypeError, ValueError) as e:
                errors.append(f"devices[{i}] ({raw.get('id', '?')}): {e}")

        speeds = {d.device_id: d.control.speed_kmh for d in devices if d.control.role == HANDOVER}
        section("control", lambda: ControlParams.from_dict(data["control"], speeds))

        if errors:
            raise ConfigError(errors)

        start, end = built["horizon"]
        config = ScenarioConfig(
            name=data.get("name", "unnamed"),
            start_year=start,
            end_year=end,
            baseline_year=int(data.get("baseline_year", start)),
            area=built["area"],
            transport=built["transport"],
            crossings_path=data.get("crossings"),
            profile_refs=built["profiles"],
            devices=devices,
            control=built["control"],
            capacity=built["capacity"],
            policies=data.get("policies", {}),
            scenarios=built["scenarios"],
            balance_tolerance=float(data.get("balance_tolerance", DEFAULT_BALANCE_TOLERANCE)),
            base_dir=base_dir,
        )
        errors = validate_config(config)
        if errors:
            raise ConfigError(errors)
        return config

    @staticmethod
    def from_json(text, base_dir="."):
        return ScenarioConfig.from_dict(json.loads(text), base_dir)

    def __eq__(self, other):
        if not isinstance(other, ScenarioConfig):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def _bound_errors(label, low, high, years):
    for year, lo, hi in zip(years, low, high):
        if lo > hi + 1e-12:
            return [f"{label}: low estimate {lo:.6g} exceeds high estimate {hi:.6g} in {year}"]
    return []


def _file_errors(config: ScenarioConfig, usage_ids) -> List[str]:
    """Crossing counts and hourly profiles must exist, parse and balance"""
    errors = []
    if config.crossings_path:
        path = config.resolve_path(config.crossings_path)
        if not os.path.exists(path):
            errors.append(f"crossings: file '{config.crossings_path}' not found")
        else:
            try:
                CrossingCounts.from_csv(path, config.balance_tolerance)
            except (OSError, ValueError) as e:
                errors.append(f"crossings: {e}")
    for pid, ref in sorted(config.profile_refs.items()):
        if not os.path.exists(config.resolve_path(ref.path)):
            errors.append(f"profiles.{pid}: file '{ref.path}' not found")
            continue
        try:
            ref.load(config.base_dir)
        except (OSError, ValueError) as e:
            errors.append(f"profiles.{pid}: {e}")
            continue
        if pid in usage_ids and ref.unit != SHARE:
            errors.append(f"profiles.{pid}: usage profiles must be share-tagged, got '{ref.unit}'")
    return errors


def validate_config(config: ScenarioConfig) -> List[str]:
    """Every cross-reference, bound and input file; returns all messages"""
    errors = []
    years = config.years
    if config.start_year > config.end_year:
        errors.append(f"horizon: start {config.start_year} after end {config.end_year}")
    if not config.start_year <= config.baseline_year <= config.end_year:
        errors.append(f"baseline_year {config.baseline_year} outside the horizon")
    if not config.crossings_path:
        errors.append("crossings: no crossing-count file given")

    seen = set()
    app_keys = set()
    usage_ids = set()
    for device in config.devices:
        did = device.device_id
        if did in seen:
            errors.append(f"devices: duplicate id '{did}'")
        seen.add(did)
        if device.density_binding not in UrbanDensities.BINDINGS:
            errors.append(f"devices.{did}: unknown density binding '{device.density_binding}'")
        control_binding = device.control.density_binding
        if control_binding is not None and control_binding not in UrbanDensities.BINDINGS:
            errors.append(f"devices.{did}.control: unknown density binding '{control_binding}'")

        source = device.penetration
        if LOW in source.variants and HIGH in source.variants:
            try:
                low = source.series(LOW, years, did).as_array()
                high = source.series(HIGH, years, did).as_array()
                errors.extend(_bound_errors(f"devices.{did}.penetration", low, high, years))
            except TrafficcastError as e:
                errors.append(f"devices.{did}.penetration: {e}")

        for app in device.applications:
            key = f"{did}.{app.app_id}"
            app_keys.add(key)
            profile_id = app.activity.profile_id
            if app.activity.kind == "usage_profile":
                if profile_id not in config.profile_refs:
                    errors.append(f"applications.{key}: unknown profile id '{profile_id}'")
                else:
                    usage_ids.add(profile_id)
            if LOW in app.variants and HIGH in app.variants:
                low = [app.daily_volume(y, LOW) for y in years]
                high = [app.daily_volume(y, HIGH) for y in years]
                errors.extend(_bound_errors(f"applications.{key}.growth", low, high, years))

    for kind in (LOW, HIGH):
        if kind not in config.control.inter_request and MEDIUM not in config.control.inter_request:
            errors.append(f"control: no '{kind}' inter-request schedule")
        if kind not in config.control.inter_site_distance and MEDIUM not in config.control.inter_site_distance:
            errors.append(f"control: no '{kind}' inter-site distance schedule")
    for label, schedules in (("inter_request", config.control.inter_request),
                             ("inter_site_distance", config.control.inter_site_distance)):
        if LOW in schedules and HIGH in schedules:
            # the high-traffic estimate signals at least as often: shorter times, denser sites
            low = [schedules[HIGH].value(y) for y in years]
            high = [schedules[LOW].value(y) for y in years]
            errors.extend(_bound_errors(f"control.{label} (high vs low)", low, high, years))
    for did in config.control.device_inter_request:
        if did not in seen:
            errors.append(f"control.device_inter_request: unknown device '{did}'")
    t_r_min = config.control.t_r_min
    overrides = [(f"control.device_inter_request.{did}", schedules)
                 for did, schedules in sorted(config.control.device_inter_request.items())]
    for label, schedules in [("control.inter_request", config.control.inter_request), *overrides]:
        for kind, schedule in sorted(schedules.items()):
            # schedules never increase, so the target is the smallest value
            if schedule.target_value < t_r_min:
                errors.append(f"{label}.{kind}: target {schedule.target_value:g} h below t_r_min {t_r_min:g} h")

    errors.extend(_file_errors(config, usage_ids))

    for policy, targets in sorted(config.policies.items()):
        for did in targets.get("devices", []):
            if did not in seen:
                errors.append(f"policies.{policy}: unknown device '{did}'")
        for key in targets.get("applications", []):
            if key not in app_keys:
                errors.append(f"policies.{policy}: unknown application '{key}'")

    for name, definition in sorted(config.scenarios.items()):
        if name in BUILTIN_SCENARIOS:
            errors.append(f"scenarios.{name}: name clashes with a built-in scenario")
        selections = [definition.default, definition.control, *definition.policies.values(),
                      *definition.devices.values(), *definition.applications.values()]
        for value in selections:
            if value is not None and value not in (LOW, HIGH):
                errors.append(f"scenarios.{name}: unknown estimate '{value}'")
        for policy in definition.policies:
            if policy not in config.policies:
                errors.append(f"scenarios.{name}: unknown policy '{policy}'")
        for did in definition.devices:
            if did not in seen:
                errors.append(f"scenarios.{name}: unknown device '{did}'")
        for key in definition.applications:
            if key not in app_keys:
                errors.append(f"scenarios.{name}: unknown application '{key}'")

    for assumption in config.capacity:
        if sum(a.name == assumption.name for a in config.capacity) > 1:
            errors.append(f"capacity: duplicate assumption '{assumption.name}'")
            break
    return errors


def load_config(path) -> ScenarioConfig:
    """Parse and validate; raises ConfigError listing every problem found"""
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from None
    config = ScenarioConfig.from_dict(data, os.path.dirname(os.path.abspath(path)))
    logger.info("Loaded config '%s': %d devices, horizon %d-%d",
                config.name, len(config.devices), config.start_year, config.end_year)
    return config


def save_config(config: ScenarioConfig, path):
    with open(path, "w", encoding="utf-8") as f:
        f.write(config.to_json())
        f.write("\n")


def parse_years(text: Optional[str], config: ScenarioConfig):
    """'2018-2030' or '2019,2030'; None keeps the configured horizon"""
    if not text:
        return config.years
    try:
        if "-" in text:
            start, end = (int(part) for part in text.split("-", 1))
            years = list(range(start, end + 1))
        else:
            years = sorted({int(part) for part in text.split(",")})
    except ValueError:
        raise ConfigError(f"Cannot parse years '{text}'") from None
    if not years:
        raise ConfigError(f"Empty year range '{text}'")
    return years
