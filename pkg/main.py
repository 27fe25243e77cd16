import argparse
import logging
import os
import sys

from trafficcast import TrafficEngine, TrafficcastError, load_config, run_forecast
from trafficcast.capacity import sweep
from trafficcast.config import parse_years
from trafficcast.control import ATTACHMENT, HANDOVER
from trafficcast.diffusion import bass_fit, read_history
from trafficcast.forecast import peak_hour
from trafficcast.golden import GoldenReport, golden_check, load_golden
from trafficcast.report import emit_report, format_table, summary_table, write_csv
from trafficcast.volume import CATEGORIES

logger = logging.getLogger("trafficcast")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_GOLDEN = 2
EXIT_IO = 3

DEFAULT_GOLDEN = ("fixtures/golden_penetration.csv", "fixtures/golden_summary.csv")


def analysis_years(args, config):
    """Requested years plus the baseline that growth is measured against"""
    return sorted(set(parse_years(args.years, config)) | {config.baseline_year})


def fit_bass(args):
    if args.history:
        path = args.history
    else:
        config = load_config(args.config)
        device = config.device(args.device)
        if not device.penetration.history:
            print(f"Error: device '{args.device}' has no adoption history")
            return EXIT_INVALID
        path = config.resolve_path(device.penetration.history)
    fixed = {}
    if args.fix_p is not None:
        fixed["p"] = args.fix_p
    if args.fix_q is not None:
        fixed["q"] = args.fix_q
    fit = bass_fit(read_history(path), fixed)
    print(f"Bass fit of {path} ({fit.n_points} points)")
    for name, value in fit.params.to_dict().items():
        held = " (fixed)" if name in fixed else ""
        print(f"  {name:>3} = {value:.6f}{held}")
    print(f"  residual norm = {fit.residual_norm:.6g}, rms = {fit.rms:.6g}")
    return EXIT_OK


def density(args):
    config = load_config(args.config)
    densities = config.urban_densities()
    os.makedirs(args.out, exist_ok=True)
    path = write_csv(densities.to_frame(), os.path.join(args.out, "densities.csv"))
    print(f"Urban densities for {config.name} written to {path}")
    for binding in ("active_population", "moving_population", "moving_cars", "moving_buses", "moving_bikes"):
        profile = densities[binding]
        print(f"  {binding:<20} mean {profile.mean():10.1f}  peak {profile.values.max():10.1f} /km2")
    return EXIT_OK


def forecast_cmd(args):
    config = load_config(args.config)
    years = parse_years(args.years, config)
    outputs = run_forecast(config, args.scenario, args.out, years)
    result = outputs.result
    scale = config.area.area_km2 if args.absolute else 1.0
    unit = "GB/day" if args.absolute else "GB/km2/day"
    print(f"Daily user volume, scenario '{args.scenario}' [{unit}]")
    print(f"{'year':>6} " + " ".join(f"{c[:12]:>12}" for c in CATEGORIES) + f" {'total':>12} {'peak h':>6}")
    for year in result.years:
        totals = result.category_totals(year)
        row = " ".join(f"{totals[c] * scale:12.1f}" for c in CATEGORIES)
        print(f"{year:>6} {row} {result.daily_total(year) * scale:12.1f} {peak_hour(result, year).hour:>6}")
    if args.out:
        print(f"Results written to {args.out} (manifest {outputs.manifest.FILENAME})")
    return EXIT_OK


def control(args):
    config = load_config(args.config)
    years = analysis_years(args, config)
    engine = TrafficEngine(config)
    result = engine.forecast(args.scenario, years)
    indicators = engine.control(result)
    os.makedirs(args.out, exist_ok=True)
    write_csv(indicators.to_frame(), os.path.join(args.out, f"control_{args.scenario}.csv"))
    base, last = config.baseline_year, years[-1]
    print(f"Peak-hour control traffic, scenario '{args.scenario}'")
    for indicator in (ATTACHMENT, HANDOVER):
        series = indicators.series(indicator)
        print(f"  {indicator:<10} {base}: {series[base]:10.1f}  {last}: {series[last]:10.1f}  "
              f"growth x{indicators.growth(indicator, base, last):.2f}")
    return EXIT_OK


def capacity(args):
    config = load_config(args.config)
    years = analysis_years(args, config)
    engine = TrafficEngine(config)
    names = ["slow", "rapid"] + ([args.scenario] if args.scenario not in ("slow", "rapid") else [])
    series = {name: engine.peak_series(engine.forecast(name, years)) for name in names}
    report = sweep(series, config.capacity, config.baseline_year)
    os.makedirs(args.out, exist_ok=True)
    write_csv(report.to_frame(), os.path.join(args.out, "capacity.csv"))
    print(f"Capacity crossing years over the {config.baseline_year} peak hour")
    for crossing in report:
        year = crossing.year if crossing.year is not None else "none"
        print(f"  {crossing.assumption:<28} x{crossing.multiplier:<5g} {crossing.scenario:<24} {year}")
    return EXIT_OK


def report(args):
    config = load_config(args.config)
    years = analysis_years(args, config)
    engine = TrafficEngine(config)
    names = args.scenarios.split(",") if args.scenarios else ["slow", "rapid"]
    results = [engine.forecast(name, years) for name in names]
    area = config.area.area_km2 if args.absolute else None
    written = emit_report(results, args.out, config.baseline_year, years[-1], area)
    print(format_table(summary_table("daily_volume", results, config.baseline_year, years[-1], area)))
    print(f"{len(written)} report files written to {args.out}")
    return EXIT_OK


def check(args):
    config = load_config(args.config)
    engine = TrafficEngine(config)
    results = {name: engine.forecast(name) for name in ("slow", "rapid")}
    golden_report = GoldenReport()
    for path in args.golden or [config.resolve_path(p) for p in DEFAULT_GOLDEN]:
        golden_check(results, load_golden(path), golden_report)
    for diff in golden_report.diffs:
        print(f"FAIL {diff}")
    for note in golden_report.excluded:
        logger.info("excluded: %s", note)
    print(golden_report.summary())
    return EXIT_OK if golden_report.passed else EXIT_GOLDEN


def main(argv=None):
    parser = argparse.ArgumentParser(description="trafficcast - urban wireless traffic forecasts")
    subparsers = parser.add_subparsers(dest="command", help="Command to run")

    def common(sub):
        sub.add_argument("--config", default="helsinki.json", help="Scenario configuration (JSON)")
        sub.add_argument("--scenario", default="slow", help="slow, rapid or a custom scenario name")
        sub.add_argument("--years", help="Year range, e.g. 2018-2030 or 2019,2030")
        sub.add_argument("--out", default="out", help="Output directory")
        sub.add_argument("--verbose", action="store_true", help="Debug logging")
        return sub

    # Fit Bass command
    fit_parser = common(subparsers.add_parser("fit-bass", help="Fit a Bass curve to an adoption history"))
    fit_parser.add_argument("--history", help="year,value CSV")
    fit_parser.add_argument("--device", default="smartphones", help="Use this device's configured history")
    fit_parser.add_argument("--fix-p", type=float, help="Hold the innovation coefficient")
    fit_parser.add_argument("--fix-q", type=float, help="Hold the imitation coefficient")

    common(subparsers.add_parser("density", help="Write hourly urban densities"))

    forecast_parser = common(subparsers.add_parser("forecast", help="Run a forecast and write its results"))
    forecast_parser.add_argument("--absolute", action="store_true", help="Report counts over the whole area")

    common(subparsers.add_parser("control", help="Peak-hour attachment and handover rates"))
    common(subparsers.add_parser("capacity", help="Macro-cell capacity crossing years"))

    report_parser = common(subparsers.add_parser("report", help="Summary tables and plot data"))
    report_parser.add_argument("--scenarios", help="Comma-separated scenarios (default slow,rapid)")
    report_parser.add_argument("--absolute", action="store_true", help="Report counts over the whole area")

    check_parser = common(subparsers.add_parser("check", help="Golden regression against published tables"))
    check_parser.add_argument("--golden", nargs="+", help="Golden CSV files")

    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if getattr(args, "verbose", False) else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        if args.command == "fit-bass":
            return fit_bass(args)
        elif args.command == "density":
            return density(args)
        elif args.command == "forecast":
            return forecast_cmd(args)
        elif args.command == "control":
            return control(args)
        elif args.command == "capacity":
            return capacity(args)
        elif args.command == "report":
            return report(args)
        elif args.command == "check":
            return check(args)
        else:
            parser.print_help()
            return EXIT_INVALID
    except TrafficcastError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except KeyError as e:
        print(f"Error: unknown name {e}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
