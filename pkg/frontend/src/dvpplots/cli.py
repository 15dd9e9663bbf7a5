"""Command line for figure rendering.

Exit codes: 0 success, 2 schema/configuration error (message names the
offending column), 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from dvpplots.figures import KINDS, FigureSpec, SchemaError, render


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dvp-plot", description="plot result CSVs")
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--in", dest="input_path", required=True)
    parser.add_argument("--loss", default=None, help="loss column for loss-curves")
    parser.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        spec = FigureSpec(
            input_path=args.input_path,
            kind=args.kind,
            output_path=args.out,
            loss=args.loss,
        )
        render(spec)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
