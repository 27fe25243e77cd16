from .errors import TrafficcastError, ConfigError, GoldenFileError
from .profile import HourlyProfile
from .diffusion import (
    PenetrationSeries,
    PenetrationSource,
    BassParams,
    StockModel,
    RolloutSchedule,
    LinearRollout,
    bass_fit,
    bass_project,
    replacement_penetration,
    coverage_rollout,
    linear_rollout,
)
from .urban_density import AreaProfile, TransportParams, CrossingCounts, UrbanDensities
from .volume import ActivityModel, ApplicationSpec, allocate_hourly
from .forecast import DeviceSpec, Scenario, ForecastResult, forecast, category_rollup, peak_hour, cagr
from .control import ControlRole, ControlParams, ControlIndicators, attachment_rate, handover_rate, control_series
from .capacity import CapacityAssumption, CrossingReport, capacity_crossing_year, sweep
from .config import ScenarioConfig, load_config
from .engine import TrafficEngine, run_forecast
from .golden import golden_check, load_golden

__all__ = [
    'TrafficcastError', 'ConfigError', 'GoldenFileError',
    'HourlyProfile',
    'PenetrationSeries', 'PenetrationSource', 'BassParams', 'StockModel', 'RolloutSchedule', 'LinearRollout',
    'bass_fit', 'bass_project', 'replacement_penetration', 'coverage_rollout', 'linear_rollout',
    'AreaProfile', 'TransportParams', 'CrossingCounts', 'UrbanDensities',
    'ActivityModel', 'ApplicationSpec', 'allocate_hourly',
    'DeviceSpec', 'Scenario', 'ForecastResult', 'forecast', 'category_rollup', 'peak_hour', 'cagr',
    'ControlRole', 'ControlParams', 'ControlIndicators', 'attachment_rate', 'handover_rate', 'control_series',
    'CapacityAssumption', 'CrossingReport', 'capacity_crossing_year', 'sweep',
    'ScenarioConfig', 'load_config',
    'TrafficEngine', 'run_forecast',
    'golden_check', 'load_golden',
]
