import copy
import json
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from trafficcast.config import ScenarioConfig, load_config, parse_years, save_config
from trafficcast.errors import ConfigError

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CONFIG_PATH = os.path.join(ROOT, "helsinki.json")


def raw_config():
    with open(CONFIG_PATH, "r", encoding="utf-8") as f:
        return json.load(f)


def find_device(data, device_id):
    return next(d for d in data["devices"] if d["id"] == device_id)


def test_bundled_config_loads(config):
    print("\n=== Testing bundled configuration ===")
    print(f"Config '{config.name}': {len(config.devices)} devices, {config.start_year}-{config.end_year}")
    assert config.years == list(range(2018, 2031))
    assert config.baseline_year == 2019
    assert len(config.devices) == 11
    assert [d.device_id for d in config.devices] == sorted(d.device_id for d in config.devices)
    assert set(config.profiles()) == {"smartphone_usage", "modem_usage"}
    assert config.device("cars").penetration.model == "replacement"
    with pytest.raises(KeyError):
        config.device("hoverboards")


def test_config_round_trip(config):
    rebuilt = ScenarioConfig.from_json(config.to_json(), config.base_dir)
    assert rebuilt == config
    assert rebuilt.to_json() == config.to_json()


def test_save_config(config, tmp_path):
    path = tmp_path / "saved.json"
    save_config(config, str(path))
    with open(path, "r", encoding="utf-8") as f:
        assert json.load(f) == json.loads(config.to_json())


def test_unknown_profile_id():
    print("\n=== Testing config validation ===")
    data = raw_config()
    find_device(data, "smartphones")["applications"][0]["activity"]["profile_id"] = "nope"
    with pytest.raises(ConfigError) as excinfo:
        ScenarioConfig.from_dict(data, ROOT)
    print(f"Errors: {excinfo.value.errors}")
    assert len(excinfo.value.errors) == 1
    assert "nope" in excinfo.value.errors[0]


def test_low_above_high_is_rejected():
    data = raw_config()
    penetration = find_device(data, "cars")["penetration"]
    penetration["low"], penetration["high"] = penetration["high"], penetration["low"]
    with pytest.raises(ConfigError) as excinfo:
        ScenarioConfig.from_dict(data, ROOT)
    assert any("devices.cars.penetration" in e and "exceeds" in e for e in excinfo.value.errors)


def test_every_error_is_reported():
    data = raw_config()
    find_device(data, "meters")["density_binding"] = "basements"
    data["policies"]["meter_requirements"]["devices"].append("jetpacks")
    data["scenarios"]["slow"] = {"default": "high"}
    with pytest.raises(ConfigError) as excinfo:
        ScenarioConfig.from_dict(data, ROOT)
    errors = excinfo.value.errors
    assert len(errors) == 3
    assert any("basements" in e for e in errors)
    assert any("jetpacks" in e for e in errors)
    assert any("built-in" in e for e in errors)


def test_section_errors_are_collected():
    data = raw_config()
    del data["area"]["area_km2"]
    data["capacity"].append({"name": "bad", "multiplier": -1})
    with pytest.raises(ConfigError) as excinfo:
        ScenarioConfig.from_dict(data, ROOT)
    assert len(excinfo.value.errors) == 2


def test_json_syntax_error(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n    "name": \n}\n', encoding="utf-8")
    with pytest.raises(ConfigError) as excinfo:
        load_config(str(path))
    assert "line 3" in str(excinfo.value)


def test_missing_profile_file(tmp_path):
    data = raw_config()
    data["crossings"] = os.path.join(ROOT, data["crossings"])
    path = tmp_path / "elsewhere.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    with pytest.raises(ConfigError) as excinfo:
        load_config(str(path))
    assert len(excinfo.value.errors) == 2


def relocated_config(data, tmp_path):
    """Write `data` next to tmp files, keeping bundled inputs reachable"""
    if not os.path.isabs(data["crossings"]):
        data["crossings"] = os.path.join(ROOT, data["crossings"])
    for ref in data["profiles"].values():
        if not os.path.isabs(ref["path"]):
            ref["path"] = os.path.join(ROOT, ref["path"])
    path = tmp_path / "relocated.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def test_inter_request_target_below_minimum():
    data = raw_config()
    data["control"]["inter_request"]["high"]["target_value"] = 0.1
    with pytest.raises(ConfigError) as excinfo:
        ScenarioConfig.from_dict(data, ROOT)
    print(f"Errors: {excinfo.value.errors}")
    assert len(excinfo.value.errors) == 1
    assert excinfo.value.errors[0].startswith("control.inter_request.high")
    assert "t_r_min" in excinfo.value.errors[0]


def test_unbalanced_crossings_rejected_at_load(tmp_path):
    print("\n=== Testing crossing balance at load ===")
    counts = tmp_path / "crossings.csv"
    counts.write_text("hour,inbound,outbound\n" + "".join(f"{h},500,250\n" for h in range(24)), encoding="utf-8")
    data = raw_config()
    data["crossings"] = str(counts)
    with pytest.raises(ConfigError) as excinfo:
        load_config(relocated_config(data, tmp_path))
    assert len(excinfo.value.errors) == 1
    assert excinfo.value.errors[0].startswith("crossings:")


def test_unnormalized_profile_rejected_at_load(tmp_path):
    shares = tmp_path / "usage.csv"
    shares.write_text("hour,share\n" + "".join(f"{h},0.02\n" for h in range(24)), encoding="utf-8")
    data = raw_config()
    data["profiles"]["modem_usage"]["path"] = str(shares)
    with pytest.raises(ConfigError) as excinfo:
        load_config(relocated_config(data, tmp_path))
    assert len(excinfo.value.errors) == 1
    assert excinfo.value.errors[0].startswith("profiles.modem_usage:")


def test_decreasing_linear_rollout_rejected():
    data = raw_config()
    find_device(data, "meters")["penetration"]["medium"]["target"] = 0.5
    with pytest.raises(ConfigError) as excinfo:
        ScenarioConfig.from_dict(data, ROOT)
    assert len(excinfo.value.errors) == 1
    assert "meters" in excinfo.value.errors[0]


def test_custom_scenarios(config):
    print("\n=== Testing custom scenarios ===")
    assert config.scenario_names()[:2] == ["slow", "rapid"]
    push = config.resolve_scenario("mobility_push")
    assert push.default == "low"
    assert push.device_estimate("bikes") == "high"
    assert push.device_estimate("urban_sensors") == "high"
    assert push.device_estimate("smartphones") == "low"
    mixed = config.resolve_scenario("adoption_low_usage_high")
    assert mixed.application_estimate("cameras", "camera_surveillance") == "high"
    assert mixed.control_estimate() == "high"
    with pytest.raises(ConfigError):
        config.resolve_scenario("utopia")


def test_custom_scenario_between_slow_and_rapid(engine, slow, rapid):
    push = engine.forecast("mobility_push")
    for year in push.years:
        assert slow.daily_total(year) <= push.daily_total(year) + 1e-9
        assert push.daily_total(year) <= rapid.daily_total(year) + 1e-9


def test_parse_years(config):
    assert parse_years(None, config) == config.years
    assert parse_years("2019-2021", config) == [2019, 2020, 2021]
    assert parse_years("2030,2019", config) == [2019, 2030]
    with pytest.raises(ConfigError):
        parse_years("soon", config)
    with pytest.raises(ConfigError):
        parse_years("2030-2019", config)


def test_raw_config_untouched():
    data = raw_config()
    before = copy.deepcopy(data)
    ScenarioConfig.from_dict(data, ROOT)
    assert data == before


if __name__ == "__main__":
    test_unknown_profile_id()
    test_low_above_high_is_rejected()
    test_every_error_is_reported()
    test_section_errors_are_collected()
    test_raw_config_untouched()
    print("\nAll config tests completed!")
