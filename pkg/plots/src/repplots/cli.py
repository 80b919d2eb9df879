"""Command line interface: plots <kind> --in CSV... --out PNG/SVG."""

from __future__ import annotations

import argparse
import sys

from .figures import KINDS, FigureSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plots", description=__doc__)
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        help="input CSV paths")
    parser.add_argument("--out", required=True, help="output image (png or svg)")
    parser.add_argument("--xlim", type=float, nargs=2)
    parser.add_argument("--ylim", type=float, nargs=2)
    parser.add_argument("--nishimori",
                        help="manifest JSON providing Nishimori temperatures")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    spec = FigureSpec(
        kind=args.kind,
        inputs=args.inputs,
        output=args.out,
        xlim=tuple(args.xlim) if args.xlim else None,
        ylim=tuple(args.ylim) if args.ylim else None,
        nishimori=args.nishimori,
    )
    try:
        points = render(spec)
    except (SchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"{args.out}: {len(points)} points")
    return 0


if __name__ == "__main__":
    sys.exit(main())
