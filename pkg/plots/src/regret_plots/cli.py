"""Command-line entry point: plot --in a.csv [b.csv ...] --out fig.png [--logx]."""

from __future__ import annotations

import argparse
import sys

from .render import PlotSpec, render_delay_robustness, render_regret_curves
from .schema import SchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot",
        description="Render regret curves from experiment harness CSVs",
    )
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        metavar="CSV")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--logx", action="store_true",
                        help="logarithmic round axis")
    parser.add_argument("--label", action="append", default=[],
                        metavar="ALGO=LABEL",
                        help="legend label override, repeatable")
    parser.add_argument("--kind", choices=("curves", "robustness"),
                        default="curves")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    labels = {}
    for item in args.label:
        key, sep, value = item.partition("=")
        if not sep:
            print(f"bad --label {item!r}, expected ALGO=LABEL", file=sys.stderr)
            return 2
        labels[key] = value
    spec = PlotSpec(inputs=tuple(args.inputs), output=args.out,
                    logx=args.logx, labels=labels)
    render = render_regret_curves if args.kind == "curves" else render_delay_robustness
    try:
        out = render(spec)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
