import argparse
import sys

from .figures import FIGURE_KINDS, FigureError, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots",
        description="Render combplan CSV outputs into figures with sidecar "
                    "point CSVs.")
    parser.add_argument("kind", choices=FIGURE_KINDS)
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        help="input CSV file(s)")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--sidecar", default=None,
                        help="sidecar CSV path (default: <out>_points.csv)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        image, sidecar = render(FigureSpec(kind=args.kind,
                                           inputs=tuple(args.inputs),
                                           output=args.out,
                                           sidecar=args.sidecar))
    except (FigureError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(image)
    print(sidecar)
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
