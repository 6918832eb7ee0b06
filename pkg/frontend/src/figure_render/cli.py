"""render_figures <csv> --id <1|2|3> --out <png>"""

from __future__ import annotations

import argparse
import sys

from .render import RenderSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="render_figures",
        description="Render an acsusy figure CSV to an image.")
    parser.add_argument("csv", help="figure CSV produced by `acsusy figure`")
    parser.add_argument("--id", type=int, required=True, choices=(1, 2, 3),
                        help="figure id the CSV belongs to")
    parser.add_argument("--out", required=True, help="output image path (.png)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = RenderSpec(csv_path=args.csv, figure_id=args.id, out_path=args.out)
    try:
        render(spec)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
