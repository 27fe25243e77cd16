"""
Report emission: long-format CSVs, summary tables, plot-ready
hourly stacks and the resolved-parameter echo.
"""
from __future__ import annotations

import json
import logging
import math
import os

import pandas as pd

from .forecast import cagr, median_density, peak_density, peak_hour
from .profile import HOURS
from .volume import CATEGORIES as CATEGORY_ORDER

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"
VIEWS = ("daily_volume", "peak_volume", "median_density", "peak_density")
UNITS = {
    "daily_volume": "GB/km2/day",
    "peak_volume": "GB/km2/h",
    "median_density": "devices/km2",
    "peak_density": "devices/km2",
}


def write_csv(frame: pd.DataFrame, path):
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info("Wrote %s (%d rows)", path, len(frame))
    return path


def write_json(data, path):
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps(data, indent=4, sort_keys=True))
        f.write("\n")
    logger.info("Wrote %s", path)
    return path


def resolved_parameters(config, result):
    """Parameter set after scenario selection, as used by the run"""
    scenario = result.scenario
    devices = {}
    for device in config.devices:
        did = device.device_id
        if did not in result.penetration:
            continue
        applications = {}
        for app in device.applications:
            kind = app.resolve_kind(scenario.application_estimate(did, app.app_id))
            applications[app.app_id] = {
                "category": app.traffic_category,
                "growth_model": app.growth_model,
                "estimate": kind,
                "parameters": app.to_dict().get("growth", {}).get(kind, {}),
                "activity": app.activity.to_dict(),
                "daily_volume_gb": {str(y): v for y, v in result.daily_volume[(did, app.app_id)].items()},
            }
        kind = device.penetration.resolve_kind(scenario.device_estimate(did))
        devices[did] = {
            "penetration_model": device.penetration.model,
            "estimate": kind,
            "parameters": device.penetration.variants[kind].to_dict(),
            "penetration": {str(y): v for y, v in result.penetration[did].items()},
            "density_binding": device.density_binding,
            "control": device.control.to_dict(),
            "applications": applications,
        }
    estimate = scenario.control_estimate()
    return {
        "config": config.name,
        "scenario": scenario.to_dict(),
        "years": result.years,
        "devices": devices,
        "control": {
            "estimate": estimate,
            "t_r_min_h": config.control.t_r_min,
            "inter_site_distance_km": {
                str(y): config.control.site_distance(y, estimate) for y in result.years
            },
        },
    }


# --- summary tables --------------------------------------------------------

def _daily_volume_rows(result, year):
    rows = {}
    for (did, app_id), category in zip(result.app_keys, result.app_categories):
        rows[(category, did, app_id)] = result.application_daily(year, did, app_id)
    return rows, sum(rows.values())


def _peak_volume_rows(result, year):
    hour = peak_hour(result, year).hour
    rows = {}
    for (did, app_id), category in zip(result.app_keys, result.app_categories):
        rows[(category, did, app_id)] = float(result.application_hourly(year, did, app_id)[hour])
    return rows, sum(rows.values())


def _median_density_rows(result, year):
    summary = median_density(result, year)
    return {("", did, ""): v for did, v in summary.per_device.items()}, summary.total


def _peak_density_rows(result, year):
    summary = peak_density(result, year)
    return {("", did, ""): v for did, v in summary.per_device.items()}, summary.total


VIEW_ROWS = {
    "daily_volume": _daily_volume_rows,
    "peak_volume": _peak_volume_rows,
    "median_density": _median_density_rows,
    "peak_density": _peak_density_rows,
}


def _share(value, total):
    return value / total if total > 0 else 0.0


def _growth(start, end, years):
    if start <= 0 or years < 1:
        return math.nan
    return cagr(start, end, years)


def summary_table(view, results, baseline_year, final_year, area_km2=None) -> pd.DataFrame:
    """
    One summary view: the baseline column comes from the first result, then
    value, share and CAGR in final_year for every result. Volume views add a
    subtotal per traffic category. area_km2 turns densities into counts.
    """
    scale = area_km2 if area_km2 else 1.0
    span = final_year - baseline_year
    base_rows, base_total = VIEW_ROWS[view](results[0], baseline_year)
    finals = [VIEW_ROWS[view](result, final_year) for result in results]

    def line(category, device, application, base_value, final_values):
        row = {
            "category": category,
            "device": device,
            "application": application,
            f"{baseline_year}": base_value * scale,
            f"{baseline_year}_share": _share(base_value, base_total),
        }
        for result, value, (_, total) in zip(results, final_values, finals):
            name = result.scenario.name
            row[f"{final_year}_{name}"] = value * scale
            row[f"{final_year}_{name}_share"] = _share(value, total)
            row[f"{final_year}_{name}_cagr"] = _growth(base_value, value, span)
        return row

    lines = []
    keys = list(base_rows)
    if view in ("daily_volume", "peak_volume"):
        keys.sort(key=lambda k: (CATEGORY_ORDER.index(k[0]), k[1], k[2]))
        for category in CATEGORY_ORDER:
            members = [k for k in keys if k[0] == category]
            for key in members:
                lines.append(line(*key, base_rows[key], [rows[key] for rows, _ in finals]))
            if members:
                lines.append(line(category, "", "subtotal",
                                  sum(base_rows[k] for k in members),
                                  [sum(rows[k] for k in members) for rows, _ in finals]))
    else:
        for key in keys:
            lines.append(line(*key, base_rows[key], [rows[key] for rows, _ in finals]))
    lines.append(line("", "", "total", base_total, [total for _, total in finals]))
    return pd.DataFrame(lines)


def summary_tables(results, baseline_year, final_year, area_km2=None):
    return {view: summary_table(view, results, baseline_year, final_year, area_km2) for view in VIEWS}


def format_table(frame: pd.DataFrame) -> str:
    shown = frame.copy()
    for column in shown.columns:
        if column.endswith("_share") or column.endswith("_cagr"):
            shown[column] = shown[column].map(lambda v: "" if pd.isna(v) else f"{100 * v:.1f}%")
        elif column not in ("category", "device", "application"):
            shown[column] = shown[column].map(lambda v: f"{v:.1f}")
    return shown.to_string(index=False)


# --- plot data ------------------------------------------------------------

def plot_data(result, year):
    """Per-hour stacked contributions of every application"""
    series = []
    for (did, app_id), category in zip(result.app_keys, result.app_categories):
        series.append({
            "device": did,
            "application": app_id,
            "category": category,
            "values": [float(v) for v in result.application_hourly(year, did, app_id)],
        })
    return {
        "scenario": result.scenario.name,
        "year": int(year),
        "unit": UNITS["peak_volume"],
        "hours": list(range(HOURS)),
        "series": series,
        "total": [float(v) for v in result.hourly_totals(year)],
        "peak_hour": peak_hour(result, year).hour,
    }


def emit_report(results, out_dir, baseline_year, final_year, area_km2=None):
    """Writes the four summary tables and plot JSON; returns the written paths"""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    suffix = "_absolute" if area_km2 else ""
    for view, frame in summary_tables(results, baseline_year, final_year, area_km2).items():
        written.append(write_csv(frame, os.path.join(out_dir, f"table_{view}{suffix}.csv")))
    for result in results:
        for year in sorted({baseline_year, final_year}):
            path = os.path.join(out_dir, f"plot_{result.scenario.name}_{year}.json")
            written.append(write_json(plot_data(result, year), path))
    return written
