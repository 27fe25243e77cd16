"""
Golden regression: compare a run against transcribed reference cells.

Each golden row names a quantity, the scenario and year it applies to, the
expected value and how to compare it: with `decimals` set the actual value
is rounded first and compared with an absolute tolerance, otherwise the
tolerance is relative. Rows with status `excluded` are documented exceptions
and are only reported.
"""
from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass
from typing import List

import pandas as pd

from .errors import GoldenFileError
from .forecast import median_density, peak_density, peak_hour

logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = (
    "table", "cell", "quantity", "scenario", "year", "device", "application",
    "value", "decimals", "tolerance", "provenance", "status", "note",
)
ACTIVE = "active"
EXCLUDED = "excluded"


def _device_daily(result, year, device_id):
    return sum(result.application_daily(year, d, a) for d, a in result.app_keys if d == device_id)


def _actual(row, result):
    year = int(row["year"])
    quantity = row["quantity"]
    device = row["device"]
    app = row["application"]
    if quantity == "penetration":
        return result.penetration[device][year]
    if quantity == "daily_total":
        return result.daily_total(year)
    if quantity == "device_share":
        total = result.daily_total(year)
        return _device_daily(result, year, device) / total if total > 0 else 0.0
    if quantity == "category_share":
        total = result.daily_total(year)
        return result.category_totals(year)[app] / total if total > 0 else 0.0
    if quantity == "application_volume":
        return result.application_daily(year, device, app)
    if quantity == "volume_per_device":
        return result.daily_volume[(device, app)][year]
    if quantity == "peak_total":
        return peak_hour(result, year).volume
    if quantity == "peak_share":
        return peak_hour(result, year).share
    if quantity == "peak_hour":
        return float(peak_hour(result, year).hour)
    if quantity == "median_total":
        return median_density(result, year).total
    if quantity == "median_density":
        return median_density(result, year).per_device[device]
    if quantity == "peak_density_total":
        return peak_density(result, year).total
    raise GoldenFileError(f"Unknown golden quantity '{quantity}'")


@dataclass
class GoldenDiff:
    table: str
    cell: str
    expected: float
    actual: float
    tolerance: float
    provenance: str

    def __str__(self):
        return (f"{self.table} [{self.cell}]: expected {self.expected:g}, got {self.actual:.6g} "
                f"(tolerance {self.tolerance:g}; {self.provenance})")


class GoldenReport:
    def __init__(self):
        self.checked = 0
        self.excluded = []
        self.diffs: List[GoldenDiff] = []

    @property
    def passed(self):
        return not self.diffs

    def summary(self):
        return f"{self.checked} cells checked, {len(self.diffs)} failed, {len(self.excluded)} documented exceptions"


def load_golden(path) -> pd.DataFrame:
    if not os.path.exists(path):
        raise FileNotFoundError(f"Golden file not found: {path}")
    frame = pd.read_csv(path, dtype={"device": str, "application": str, "note": str}, keep_default_na=False)
    missing = [c for c in REQUIRED_COLUMNS if c not in frame.columns]
    if missing:
        raise GoldenFileError(f"{path}: missing columns {', '.join(missing)}")
    return frame


def _matches(actual, expected, decimals, tolerance):
    if decimals != "":
        return abs(round(actual, int(decimals)) - expected) <= tolerance + 1e-12
    return abs(actual - expected) <= tolerance * abs(expected)


def golden_check(results, golden: pd.DataFrame, report: GoldenReport = None) -> GoldenReport:
    """results maps scenario name to ForecastResult"""
    report = report or GoldenReport()
    for _, row in golden.iterrows():
        cell = row["cell"]
        if row["status"] == EXCLUDED:
            report.excluded.append(f"{row['table']} [{cell}]: {row['note']}")
            logger.warning("Golden exception %s [%s]: %s", row["table"], cell, row["note"])
            continue
        scenario = row["scenario"]
        if scenario not in results:
            raise GoldenFileError(f"{row['table']} [{cell}] needs scenario '{scenario}', which was not run")
        try:
            actual = float(_actual(row, results[scenario]))
        except KeyError as e:
            raise GoldenFileError(f"{row['table']} [{cell}] refers to unknown {e}") from None
        expected = float(row["value"])
        tolerance = float(row["tolerance"])
        report.checked += 1
        if math.isnan(actual) or not _matches(actual, expected, row["decimals"], tolerance):
            report.diffs.append(GoldenDiff(row["table"], cell, expected, actual, tolerance, row["provenance"]))
    logger.info("Golden check: %s", report.summary())
    return report
