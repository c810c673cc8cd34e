"""Plot tool CLI: render one figure from a simulator CSV file."""

import argparse
import sys

from .figures import KINDS, FigureSpec, SchemaError, render


def build_parser():
    parser = argparse.ArgumentParser(
        prog="plot", description="Render figures from dcesim CSV traces")
    parser.add_argument("--kind", required=True, choices=KINDS,
                        help="figure kind")
    parser.add_argument("--in", dest="input_path", required=True,
                        help="input CSV path")
    parser.add_argument("--out", dest="output_path", required=True,
                        help="output image path (format from extension)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    spec = FigureSpec(kind=args.kind, input_path=args.input_path,
                      output_path=args.output_path)
    try:
        path = render(spec)
    except SchemaError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"write error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {path}")
    return 0


def entry():  # console-script hook
    sys.exit(main())


if __name__ == "__main__":
    entry()
