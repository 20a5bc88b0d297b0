"""figures <kind> --in <csv> [--bounds <json>] --out <png|svg>"""
from __future__ import annotations

import argparse
import json
import sys

from . import plots


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Plot calibration curves, stopping-time boxplots, and "
                    "risk-over-time traces from simulation CSV output.")
    parser.add_argument("kind",
                        choices=("calibration", "boxplot", "risk_over_time"))
    parser.add_argument("--in", dest="inputs", required=True, nargs="+",
                        help="input CSV file(s); several for risk_over_time")
    parser.add_argument("--bounds", default=None,
                        help="bounds JSON for the boxplot")
    parser.add_argument("--out", required=True, help="output .png or .svg")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.kind == "calibration":
            plots.plot_calibration(args.inputs[0], args.out)
        elif args.kind == "boxplot":
            bounds = None
            if args.bounds:
                with open(args.bounds) as fh:
                    bounds = json.load(fh)
            plots.plot_boxplot(args.inputs[0], args.out, bounds)
        else:
            plots.plot_risk_over_time(args.inputs, args.out)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
