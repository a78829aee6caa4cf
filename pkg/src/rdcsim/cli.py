"""Command-line entry point: ``rdc-sim run | calc | validate-timing``."""

import argparse
import sys
from pathlib import Path

from .harness import ScenarioError, emit_report, min_e2e_latency, parse_scenario, run_experiment
from .mac.config import get_protocol
from .mac.timing import CONSTRAINTS, get_preset, validate_timing


def _run(args) -> int:
    try:
        text = Path(args.scenario).read_text()
    except OSError as e:
        print(f"error: cannot read scenario: {e}", file=sys.stderr)
        return 2
    if args.set:
        text += "\n" + "\n".join(args.set)
    scn = parse_scenario(text)
    report = run_experiment(scn, runs=args.runs, seed=args.seed, workers=args.workers)
    files = emit_report([report], fmt=args.format, out_dir=args.out)
    if args.out is None:
        name = "aggregate.csv" if args.format == "csv" else "summary.txt"
        sys.stdout.write(files[name])
    else:
        for name in files:
            print(Path(args.out) / name)
    return 0


def _calc(args) -> int:
    us = min_e2e_latency(get_preset(args.preset), args.protocol, args.hops)
    print(f"{us / 1000:.1f} ms")
    return 0


def _validate(args) -> int:
    timing = get_preset(args.preset)
    bad = validate_timing(timing)
    if bad:
        for name in bad:
            print(f"violated: {name}")
        return 1
    print(f"{args.preset}: ok ({' ; '.join(CONSTRAINTS)})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rdc-sim", description="Radio duty cycling MAC simulator")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a multi-seed campaign from a scenario file")
    r.add_argument("--scenario", required=True, help="file of key=value lines")
    r.add_argument("--runs", type=int, help="override the number of runs")
    r.add_argument("--seed", type=int, help="override seed_base")
    r.add_argument("--out", help="directory for aggregate and per-run files")
    r.add_argument("--format", choices=("csv", "table"), default="csv")
    r.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    r.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="extra scenario line, may repeat")
    r.set_defaults(func=_run)

    c = sub.add_parser("calc", help="analytic phase-locked end-to-end latency")
    c.add_argument("--preset", default="sec423")
    c.add_argument("--protocol", required=True)
    c.add_argument("--hops", type=int, required=True)
    c.set_defaults(func=_calc)

    v = sub.add_parser("validate-timing", help="check the timing constraint chain of a preset")
    v.add_argument("--preset", default="table3")
    v.set_defaults(func=_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "calc":
            get_protocol(args.protocol)
        return args.func(args)
    except (ScenarioError, ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
