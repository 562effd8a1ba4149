"""Command line front end: ``orlicz <subcommand> --scenario path``."""
import argparse
import csv
import os
import sys

from . import __version__
from .scenario import RUNNERS, Scenario, ScenarioError, Unbounded, dumps

EXIT_OK, EXIT_INVALID, EXIT_UNBOUNDED = 0, 2, 3


def build_parser():
    parser = argparse.ArgumentParser(prog="orlicz", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in RUNNERS:
        p = sub.add_parser(name, help=f"run the {name} report")
        p.add_argument("--scenario", required=True, help="path to a scenario JSON file")
        p.add_argument("--out", default=".", help="directory for the report files")
        p.add_argument("--seed", type=int, default=None, help="override the probe seed")
        p.add_argument("--horizon", type=int, default=None, help="override classifier/probe horizon")
    return parser


def write_outputs(out, name, report, files):
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, f"{name}.json")
    with open(path, "w") as fh:
        fh.write(dumps(report))
    for fname, rows in sorted(files.items()):
        with open(os.path.join(out, fname), "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)
    return path


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        sc = Scenario.load(args.scenario, seed=args.seed, horizon=args.horizon)
        report, files = RUNNERS[args.command](sc)
    except ScenarioError as exc:
        print(f"orlicz: invalid scenario: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Unbounded as exc:
        path = write_outputs(args.out, args.command, exc.report, exc.files)
        print(f"orlicz: {exc} (report: {path})", file=sys.stderr)
        return EXIT_UNBOUNDED
    path = write_outputs(args.out, args.command, report, files)
    print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
