import numpy as np
import pandas as pd

from .errors import ParameterError

HOURS = 24
SHARE = "share"
PATTERN = "pattern"
PER_KM2 = "per_km2"
SHARE_TOLERANCE = 1e-9


class HourlyProfile:
    """A 24-slot non-negative series over hours 0-23"""

    def __init__(self, values, unit=PER_KM2):
        values = np.asarray(values, dtype=float)
        if values.shape != (HOURS,):
            raise ParameterError(f"Hourly profile needs exactly {HOURS} slots, got {values.size}")
        if not np.all(np.isfinite(values)):
            raise ParameterError("Hourly profile contains non-finite values")
        if np.any(values < 0):
            raise ParameterError(f"Hourly profile has negative values at hours {np.flatnonzero(values < 0).tolist()}")
        if unit == SHARE and abs(values.sum() - 1.0) > SHARE_TOLERANCE:
            raise ParameterError(f"Share profile sums to {values.sum():.12f}, expected 1")
        self.values = values
        self.unit = unit

    @classmethod
    def constant(cls, value, unit=PER_KM2):
        return cls(np.full(HOURS, float(value)), unit)

    @classmethod
    def share_of(cls, values):
        """Normalize raw weights into a share-tagged profile"""
        values = np.asarray(values, dtype=float)
        total = values.sum()
        if total <= 0:
            raise ParameterError("Cannot build a share profile from all-zero weights")
        return cls(values / total, SHARE)

    @classmethod
    def from_csv(cls, path, column, unit=PER_KM2, tolerance=1e-6):
        frame = pd.read_csv(path)
        if "hour" not in frame.columns or column not in frame.columns:
            raise ParameterError(f"{path}: expected columns 'hour' and '{column}'")
        frame = frame.sort_values("hour")
        if frame["hour"].tolist() != list(range(HOURS)):
            raise ParameterError(f"{path}: hours must be exactly 0-23")
        values = frame[column].to_numpy(dtype=float)
        if unit == SHARE:
            # shares on disk are rounded, normalize once within tolerance
            if abs(values.sum() - 1.0) > tolerance:
                raise ParameterError(f"{path}: shares sum to {values.sum():.9f}, expected 1 +/- {tolerance}")
            values = values / values.sum()
        return cls(values, unit)

    def total(self):
        return float(self.values.sum())

    def mean(self):
        return float(self.values.mean())

    def median(self):
        # even count: mean of the two central values
        return float(np.median(self.values))

    def scaled(self, factor):
        return HourlyProfile(self.values * factor, PER_KM2 if self.unit == SHARE else self.unit)

    def __getitem__(self, hour):
        return float(self.values[hour])

    def __len__(self):
        return HOURS

    def __eq__(self, other):
        if not isinstance(other, HourlyProfile):
            return NotImplemented
        return self.unit == other.unit and np.array_equal(self.values, other.values)

    def __repr__(self):
        return f"HourlyProfile(unit={self.unit!r}, total={self.total():.4f})"

    def to_dict(self):
        return {"unit": self.unit, "values": self.values.tolist()}

    @staticmethod
    def from_dict(data):
        return HourlyProfile(data["values"], data.get("unit", PER_KM2))
