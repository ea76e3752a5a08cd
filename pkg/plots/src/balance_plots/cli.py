"""plots <response|utilization|completion> --in FILE --out IMAGE [--format svg|png]

response and completion read a sweep.csv; utilization reads a summary.json.
Exit codes: 0 drawn, 2 schema/usage problems, 1 filesystem failures.
"""

import argparse
import sys

from .io import PlotDataError
from .render import FORMATS, plot_completion_rate, plot_response_time, plot_utilization

COMMANDS = {
    "response": (plot_response_time, "sweep.csv"),
    "utilization": (plot_utilization, "summary.json"),
    "completion": (plot_completion_rate, "sweep.csv"),
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="plots", description="Figures from rl-balance experiment exports")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, source) in COMMANDS.items():
        p = sub.add_parser(name, help=f"render from a {source}")
        p.add_argument("--in", dest="in_path", required=True,
                       help=f"input {source}")
        p.add_argument("--out", dest="out_path", required=True,
                       help="image file to write")
        p.add_argument("--format", choices=FORMATS, default="svg")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    renderer, _ = COMMANDS[args.command]
    try:
        path = renderer(args.in_path, args.out_path, args.format)
    except PlotDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
