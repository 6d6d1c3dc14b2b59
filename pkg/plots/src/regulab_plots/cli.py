"""plots: render a scaling CSV into one log-log figure per experiment."""

from __future__ import annotations

import argparse
import sys

from . import EmptyGroups, MissingColumns, PlotSpec, render_scaling


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots",
        description="Render scaling CSVs into log2-log2 figures with "
                    "fitted-slope labels, one file per experiment group.",
    )
    parser.add_argument("csv", help="scaling CSV path")
    parser.add_argument("--out", default="figures",
                        help="output directory (default: figures/)")
    parser.add_argument("--x-column", default="delta")
    parser.add_argument("--y-column", default="value")
    parser.add_argument("--group-by", default="experiment_name")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    spec = PlotSpec(input_csv=args.csv, output=args.out,
                    x_column=args.x_column, y_column=args.y_column,
                    group_by=args.group_by)
    try:
        rendered = render_scaling(spec)
    except MissingColumns as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except EmptyGroups as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for fig in rendered:
        print(f"{fig.group},{fig.path},{fig.slope:.6f},{fig.n_rows}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
