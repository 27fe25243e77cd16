"""
Annual device-penetration models.

Four families produce a PenetrationSeries per device and estimate kind:

- Bass diffusion, projected from (p, q, m, t0) or fitted to an adoption history
- replacement purchase, where connected sales accumulate against a stock or body
- coverage rollout, a fixed fraction of a maximum density deployed per year
- linear rollout between a base and a target penetration

Every series is non-negative and non-decreasing over the modeled years.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Optional

import numpy as np
import pandas as pd
from scipy.optimize import least_squares

from .errors import (
    ConfigError,
    ConvergenceError,
    DegenerateInputError,
    InsufficientDataError,
    ModelError,
    ParameterError,
)

logger = logging.getLogger(__name__)

LOW = "low"
HIGH = "high"
MEDIUM = "medium"
ESTIMATE_KINDS = (LOW, HIGH, MEDIUM)

# multi-start grid for bass_fit, fixed so fits are reproducible
P_STARTS = (0.001, 0.01, 0.03, 0.1)
Q_STARTS = (0.01, 0.1, 0.4, 1.0)
FIT_MAX_NFEV = 2000
# residuals are relative to the observed value, floored at this share of the peak
RELATIVE_FLOOR = 0.01
# a converged start this close to the data ends the search
EXACT_RMS = 1e-9


def _years(years: Iterable[int]) -> list:
    years = [int(y) for y in years]
    if not years:
        raise ParameterError("Year range must not be empty")
    return years


class PenetrationSeries:
    """Annual penetration of one device under one estimate kind"""

    def __init__(self, values: Mapping[int, float], device_id=None, estimate_kind=MEDIUM):
        if estimate_kind not in ESTIMATE_KINDS:
            raise ParameterError(f"Unknown estimate kind: {estimate_kind}")
        self.device_id = device_id
        self.estimate_kind = estimate_kind
        self.values = {int(y): float(v) for y, v in sorted(values.items())}

    @property
    def years(self):
        return list(self.values)

    def __getitem__(self, year):
        return self.values[int(year)]

    def as_array(self):
        return np.array(list(self.values.values()), dtype=float)

    def is_monotone(self, tolerance=1e-12):
        arr = self.as_array()
        return bool(np.all(arr >= -tolerance) and np.all(np.diff(arr) >= -tolerance))

    def to_dict(self):
        return {
            "device_id": self.device_id,
            "estimate_kind": self.estimate_kind,
            "values": {str(y): v for y, v in self.values.items()},
        }

    @staticmethod
    def from_dict(data):
        values = {int(y): v for y, v in data["values"].items()}
        return PenetrationSeries(values, data.get("device_id"), data.get("estimate_kind", MEDIUM))


# --- Bass diffusion -------------------------------------------------------

@dataclass(frozen=True)
class BassParams:
    p: float
    q: float
    m: float
    t0: float

    def __post_init__(self):
        if not self.p > 0:
            raise ParameterError(f"Bass innovation coefficient p must be positive, got {self.p}")
        if self.q < 0:
            raise ParameterError(f"Bass imitation coefficient q must be non-negative, got {self.q}")
        if not self.m > 0:
            raise ParameterError(f"Bass carrying capacity m must be positive, got {self.m}")

    def to_dict(self):
        return {"p": self.p, "q": self.q, "m": self.m, "t0": self.t0}

    @staticmethod
    def from_dict(data):
        return BassParams(float(data["p"]), float(data["q"]), float(data["m"]), float(data["t0"]))


def bass_fraction(t, p, q):
    """Cumulative adoption fraction F(t), zero for t <= 0"""
    t = np.asarray(t, dtype=float)
    decay = np.exp(-(p + q) * np.clip(t, 0.0, None))
    fraction = (1.0 - decay) / (1.0 + (q / p) * decay)
    return np.where(t > 0, fraction, 0.0)


def bass_project(params: BassParams, years: Iterable[int], device_id=None) -> PenetrationSeries:
    years = _years(years)
    values = params.m * bass_fraction(np.array(years) - params.t0, params.p, params.q)
    return PenetrationSeries(dict(zip(years, values.tolist())), device_id, MEDIUM)


@dataclass
class BassFit:
    params: BassParams
    residual_norm: float
    rms: float
    n_points: int
    fixed: Dict[str, float] = field(default_factory=dict)

    def to_dict(self):
        return {
            "params": self.params.to_dict(),
            "residual_norm": self.residual_norm,
            "rms": self.rms,
            "n_points": self.n_points,
            "fixed": dict(self.fixed),
        }


def read_history(path) -> Dict[int, float]:
    """Load a `year,value` adoption history CSV"""
    frame = pd.read_csv(path)
    if list(frame.columns[:2]) != ["year", "value"]:
        raise ParameterError(f"{path}: expected header 'year,value'")
    return {int(y): float(v) for y, v in zip(frame["year"], frame["value"])}


def bass_fit(history, fixed: Optional[Mapping[str, float]] = None) -> BassFit:
    """
    Least-squares fit of (p, q, m, t0) to an adoption history.

    `history` is a mapping year -> penetration or a sequence of (year, value)
    pairs. Parameters named in `fixed` are held at the given values.
    """
    pairs = list(history.items()) if isinstance(history, Mapping) else [tuple(x) for x in history]
    if len(pairs) < 4:
        raise InsufficientDataError(f"Bass fit needs at least 4 points, got {len(pairs)}")
    years = np.array([float(y) for y, _ in pairs])
    values = np.array([float(v) for _, v in pairs])
    if not isinstance(history, Mapping) and np.any(np.diff(years) <= 0):
        raise ParameterError("History years must be strictly increasing")
    order = np.argsort(years)
    years, values = years[order], values[order]
    if np.any(values < 0):
        raise ParameterError("History values must be non-negative")
    if np.ptp(values) == 0:
        raise DegenerateInputError("Constant adoption history carries no growth signal")

    fixed = dict(fixed or {})
    unknown = set(fixed) - {"p", "q", "m", "t0"}
    if unknown:
        raise ParameterError(f"Unknown fixed Bass parameters: {sorted(unknown)}")
    free = [name for name in ("p", "q", "m", "t0") if name not in fixed]

    first, last = years[0], years[-1]
    span = max(last - first, 1.0)
    top = values.max()
    lower = {"p": 1e-6, "q": 0.0, "m": 1e-9, "t0": first - 200.0}
    upper = {"p": 1.0, "q": 3.0, "m": 100.0 * top, "t0": last - 1.0}

    def unpack(x):
        params = dict(fixed)
        params.update(zip(free, x))
        return params

    weights = 1.0 / np.maximum(values, RELATIVE_FLOOR * top)

    def absolute(x):
        prm = unpack(x)
        return prm["m"] * bass_fraction(years - prm["t0"], prm["p"], prm["q"]) - values

    def residuals(x):
        return absolute(x) * weights

    starts = []
    for t0 in (first - 1.0, first, first - span, first - 3.0 * span):
        for p in P_STARTS:
            for q in Q_STARTS:
                guess = {"p": p, "q": q, "m": 1.1 * top, "t0": t0}
                starts.append([float(np.clip(guess[n], lower[n], upper[n])) for n in free])
    # identical starts collapse when p or q are fixed
    starts = [list(s) for s in dict.fromkeys(tuple(s) for s in starts)]

    best, best_converged = None, None
    for x0 in starts:
        result = least_squares(
            residuals,
            x0,
            bounds=([lower[n] for n in free], [upper[n] for n in free]),
            method="trf",
            x_scale="jac",
            xtol=1e-12,
            ftol=1e-12,
            gtol=1e-12,
            max_nfev=FIT_MAX_NFEV,
        )
        logger.debug("bass_fit start %s -> cost %.3e status %d", x0, result.cost, result.status)
        if best is None or result.cost < best.cost:
            best = result
        if result.status > 0 and (best_converged is None or result.cost < best_converged.cost):
            best_converged = result
        if result.status > 0 and np.sqrt(2.0 * result.cost / len(values)) < EXACT_RMS:
            break

    if best_converged is None:
        prm = unpack(best.x)
        raise ConvergenceError(
            f"Bass fit did not converge within {FIT_MAX_NFEV} evaluations",
            best_params=prm,
            residual_norm=float(np.linalg.norm(absolute(best.x))),
        )

    prm = unpack(best_converged.x)
    params = BassParams(prm["p"], prm["q"], prm["m"], prm["t0"])
    norm = float(np.linalg.norm(absolute(best_converged.x)))
    fit = BassFit(params, norm, norm / np.sqrt(len(values)), len(values), fixed)
    logger.info("Bass fit p=%.5f q=%.5f m=%.5f t0=%.3f rms=%.4g", params.p, params.q, params.m, params.t0, fit.rms)
    return fit


# --- replacement purchase -------------------------------------------------

@dataclass(frozen=True)
class StockModel:
    """
    Replacement-purchase inputs.

    annual_sales is a count per year, optionally growing by annual_sales_growth
    per year after start_year, or an explicit per-year schedule. The connected
    share is an explicit per-year schedule, or share_initial growing by
    share_growth_factor per year. adopting_body_size None means the stock itself
    is the adopting body.
    """
    start_year: int
    annual_sales: object
    initial_stock: float = 0.0
    base_year: int = 2018
    annual_net_growth: float = 0.0
    annual_sales_growth: float = 0.0
    connected_share_schedule: Optional[Dict[int, float]] = None
    share_initial: float = 1.0
    share_growth_factor: float = 1.0
    device_lifetime_years: Optional[int] = None
    adopting_body_size: Optional[float] = None

    def __post_init__(self):
        if self.device_lifetime_years is not None and self.device_lifetime_years < 1:
            raise ParameterError("Device lifetime must be at least one year or unbounded")
        if self.adopting_body_size is not None and not self.adopting_body_size > 0:
            raise ParameterError("Adopting body size must be positive")

    def stock(self, year):
        return self.initial_stock + self.annual_net_growth * (year - self.base_year)

    def sales(self, year):
        if isinstance(self.annual_sales, Mapping):
            return float(self.annual_sales.get(year, 0.0))
        return float(self.annual_sales) + self.annual_sales_growth * (year - self.start_year)

    def connected_share(self, year):
        if year < self.start_year:
            return 0.0
        if self.connected_share_schedule is not None:
            known = [y for y in self.connected_share_schedule if y <= year]
            share = self.connected_share_schedule[max(known)] if known else 0.0
        else:
            share = self.share_initial * self.share_growth_factor ** (year - self.start_year)
        return min(max(share, 0.0), 1.0)

    def to_dict(self):
        data = {
            "start_year": self.start_year,
            "annual_sales": (
                {str(y): v for y, v in self.annual_sales.items()}
                if isinstance(self.annual_sales, Mapping) else self.annual_sales
            ),
            "initial_stock": self.initial_stock,
            "base_year": self.base_year,
            "annual_net_growth": self.annual_net_growth,
            "annual_sales_growth": self.annual_sales_growth,
            "share_initial": self.share_initial,
            "share_growth_factor": self.share_growth_factor,
            "device_lifetime_years": self.device_lifetime_years,
            "adopting_body_size": self.adopting_body_size,
        }
        if self.connected_share_schedule is not None:
            data["connected_share_schedule"] = {str(y): v for y, v in self.connected_share_schedule.items()}
        return data

    @staticmethod
    def from_dict(data):
        sales = data["annual_sales"]
        if isinstance(sales, Mapping):
            sales = {int(y): float(v) for y, v in sales.items()}
        schedule = data.get("connected_share_schedule")
        if schedule is not None:
            schedule = {int(y): float(v) for y, v in schedule.items()}
        return StockModel(
            start_year=int(data["start_year"]),
            annual_sales=sales,
            initial_stock=float(data.get("initial_stock", 0.0)),
            base_year=int(data.get("base_year", 2018)),
            annual_net_growth=float(data.get("annual_net_growth", 0.0)),
            annual_sales_growth=float(data.get("annual_sales_growth", 0.0)),
            connected_share_schedule=schedule,
            share_initial=float(data.get("share_initial", 1.0)),
            share_growth_factor=float(data.get("share_growth_factor", 1.0)),
            device_lifetime_years=data.get("device_lifetime_years"),
            adopting_body_size=data.get("adopting_body_size"),
        )


def connected_count(model: StockModel, year: int) -> float:
    first = model.start_year
    if model.device_lifetime_years is not None:
        first = max(first, year - model.device_lifetime_years + 1)
    return sum(model.sales(s) * model.connected_share(s) for s in range(first, year + 1))


def replacement_penetration(model: StockModel, years, device_id=None, estimate_kind=MEDIUM) -> PenetrationSeries:
    values = {}
    for year in _years(years):
        count = connected_count(model, year)
        if model.adopting_body_size is None:
            stock = model.stock(year)
            if stock <= 0:
                raise ModelError(f"Stock for {device_id or 'device'} is {stock} in {year}")
            values[year] = min(max(count / stock, 0.0), 1.0)
        else:
            values[year] = count / model.adopting_body_size
    return PenetrationSeries(values, device_id, estimate_kind)


# --- rollouts -------------------------------------------------------------

@dataclass(frozen=True)
class RolloutSchedule:
    max_density: float
    annual_fraction: float
    start_year: int

    def __post_init__(self):
        if not 0.0 <= self.annual_fraction <= 1.0:
            raise ParameterError(f"Annual rollout fraction must be in [0, 1], got {self.annual_fraction}")
        if self.max_density < 0:
            raise ParameterError("Maximum rollout density must be non-negative")

    def to_dict(self):
        return {"max_density": self.max_density, "annual_fraction": self.annual_fraction, "start_year": self.start_year}

    @staticmethod
    def from_dict(data):
        return RolloutSchedule(float(data["max_density"]), float(data["annual_fraction"]), int(data["start_year"]))


def coverage_rollout(sched: RolloutSchedule, years, device_id=None, estimate_kind=MEDIUM) -> PenetrationSeries:
    values = {}
    for year in _years(years):
        if year < sched.start_year:
            values[year] = 0.0
        else:
            steps = year - sched.start_year + 1
            values[year] = min(sched.max_density, sched.max_density * sched.annual_fraction * steps)
    return PenetrationSeries(values, device_id, estimate_kind)


@dataclass(frozen=True)
class LinearRollout:
    base: float
    target: float
    start_year: int
    duration_years: int

    def __post_init__(self):
        if self.duration_years < 1:
            raise ParameterError("Linear rollout duration must be at least one year")
        if self.target < self.base:
            raise ConfigError(f"Linear rollout target {self.target:g} below its base {self.base:g}")

    def to_dict(self):
        return {"base": self.base, "target": self.target, "start_year": self.start_year, "duration_years": self.duration_years}

    @staticmethod
    def from_dict(data):
        return LinearRollout(float(data["base"]), float(data["target"]), int(data["start_year"]), int(data["duration_years"]))


def linear_rollout(base, target, start_year, duration_years, years, device_id=None, estimate_kind=MEDIUM) -> PenetrationSeries:
    rollout = LinearRollout(base, target, start_year, duration_years)
    values = {}
    for year in _years(years):
        progress = min(max((year - rollout.start_year) / rollout.duration_years, 0.0), 1.0)
        values[year] = rollout.base + (rollout.target - rollout.base) * progress
    return PenetrationSeries(values, device_id, estimate_kind)


# --- model dispatch -------------------------------------------------------

MODEL_TYPES = {
    "bass": BassParams,
    "replacement": StockModel,
    "coverage": RolloutSchedule,
    "linear": LinearRollout,
}


class PenetrationSource:
    """A diffusion model family with its per-estimate parameter variants"""

    def __init__(self, model, variants, history=None):
        if model not in MODEL_TYPES:
            raise ParameterError(f"Unknown penetration model: {model}")
        if not variants:
            raise ParameterError(f"Penetration model '{model}' has no estimate variants")
        for kind in variants:
            if kind not in ESTIMATE_KINDS:
                raise ParameterError(f"Unknown estimate kind: {kind}")
        self.model = model
        self.variants = dict(variants)
        self.history = history

    @property
    def medium_only(self):
        return set(self.variants) == {MEDIUM}

    def resolve_kind(self, estimate):
        """Map a requested low/high estimate onto an available variant"""
        if estimate in self.variants:
            return estimate
        if MEDIUM in self.variants:
            return MEDIUM
        raise ParameterError(f"No '{estimate}' variant for model '{self.model}'")

    def series(self, estimate, years, device_id=None):
        kind = self.resolve_kind(estimate)
        params = self.variants[kind]
        if self.model == "bass":
            result = bass_project(params, years, device_id)
            result.estimate_kind = kind
            return result
        if self.model == "replacement":
            return replacement_penetration(params, years, device_id, kind)
        if self.model == "coverage":
            return coverage_rollout(params, years, device_id, kind)
        return linear_rollout(params.base, params.target, params.start_year, params.duration_years, years, device_id, kind)

    def to_dict(self):
        data = {"model": self.model}
        data.update({kind: params.to_dict() for kind, params in sorted(self.variants.items())})
        if self.history:
            data["history"] = self.history
        return data

    @staticmethod
    def from_dict(data):
        model = data.get("model")
        if model not in MODEL_TYPES:
            raise ParameterError(f"Unknown penetration model: {model}")
        builder = MODEL_TYPES[model]
        variants = {kind: builder.from_dict(data[kind]) for kind in ESTIMATE_KINDS if kind in data}
        return PenetrationSource(model, variants, data.get("history"))
