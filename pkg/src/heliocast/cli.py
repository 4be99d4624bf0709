"""Command-line interface.

Three subcommands: ``simulate`` writes a synthetic dataset, ``forecast`` runs
the rolling probabilistic forecast over a date range, and ``report``
aggregates a forecast run into summary tables and calibration histograms.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

from . import orchestrate, simulate
from .errors import DataError, InputError, NumericalError


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="heliocast", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_sim = sub.add_parser("simulate", help="write a synthetic dataset")
    p_sim.add_argument("--days", type=int, required=True, help="number of simulated days")
    p_sim.add_argument("--seed", type=int, default=0, help="simulation seed")
    p_sim.add_argument("--out", required=True, help="output directory")

    p_fc = sub.add_parser("forecast", help="run rolling forecasts over a date range")
    p_fc.add_argument("--config", help="key=value configuration file")
    p_fc.add_argument("--from", dest="start", help="first forecast date (YYYY-MM-DD)")
    p_fc.add_argument("--to", dest="end", help="last forecast date (YYYY-MM-DD)")
    p_fc.add_argument("--model", choices=("full", "indep", "indep-resid"))
    p_fc.add_argument(
        "--copula",
        nargs="?",
        const="full",
        choices=("full", "ar1"),
        help="enable copula coupling with the given correlation structure",
    )
    p_fc.add_argument("--no-copula", action="store_true", help="disable copula coupling")
    p_fc.add_argument("--data", help="input data directory")
    p_fc.add_argument("--out", help="output directory")
    p_fc.add_argument("--seed", type=int, help="run seed")
    p_fc.add_argument("--window-days", type=int, help="training window length")
    p_fc.add_argument("--samples", type=int, help="predictive sample count")
    p_fc.add_argument(
        "--sweep-windows",
        help="comma-separated window lengths; also writes window_sweep.csv",
    )

    p_rep = sub.add_parser("report", help="aggregate a forecast run")
    p_rep.add_argument("--in", dest="in_dir", required=True, help="forecast output directory")
    p_rep.add_argument("--histograms", help="directory for calibration histograms")
    return parser


def _forecast_config(args) -> orchestrate.RunConfig:
    mapping = orchestrate.load_config(args.config) if args.config else {}
    overrides = {
        "start_date": args.start,
        "end_date": args.end,
        "model": args.model,
        "data_dir": args.data,
        "out_dir": args.out,
        "seed": args.seed,
        "window_days": args.window_days,
        "samples": args.samples,
        "sweep_windows": args.sweep_windows,
    }
    for key, value in overrides.items():
        if value is not None:
            mapping[key] = value
    if args.no_copula:
        mapping["copula_on"] = "false"
    elif args.copula is not None:
        mapping["copula_on"] = "true"
        mapping["copula_structure"] = args.copula
    return orchestrate.config_from_mapping(mapping)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            if args.days < 1:
                raise InputError("--days must be >= 1")
            simulate.write_dataset(args.out, args.days, args.seed)
        elif args.command == "forecast":
            orchestrate.run_forecast(_forecast_config(args))
        elif args.command == "report":
            orchestrate.run_report(args.in_dir, args.histograms)
    except InputError as exc:
        print(f"heliocast: usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"heliocast: data error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"heliocast: numerical error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
