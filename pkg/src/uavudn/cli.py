"""Command line entry point.

Exit codes: 0 success, 1 invalid spec, 2 a scenario failed at some lattice point.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from . import harness
from .errors import SpecValidationError

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="uavudn",
                                description="UAV-assisted dense network experiments")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment spec and write its CSV")
    run.add_argument("spec")
    run.add_argument("--out", help="CSV path (overrides the spec's output)")
    run.add_argument("--seed", type=int, help="master seed (overrides the spec)")
    run.add_argument("--trials", type=int, help="trials per lattice point (overrides the spec)")
    run.add_argument("--jobs", type=int, default=1,
                     help="worker processes; results do not depend on it")

    val = sub.add_parser("validate", help="check a spec without running it")
    val.add_argument("spec")

    sub.add_parser("list-scenarios", help="print the scenario ids")
    return p


def _load(path):
    try:
        return harness.load_spec(path)
    except SpecValidationError as exc:
        print(exc, file=sys.stderr)
    except OSError as exc:
        print(f"cannot read {path}: {exc}", file=sys.stderr)
    return None


def main(argv=None) -> int:
    args = _parser().parse_args(argv)

    if args.command == "list-scenarios":
        for name, sc in harness.SCENARIOS.items():
            print(f"{name}\t{sc.description}")
        return EXIT_OK

    spec = _load(args.spec)
    if spec is None:
        return EXIT_INVALID
    if args.command == "validate":
        print(f"{args.spec}: ok ({spec.scenario}, {len(spec.lattice())} lattice points)")
        return EXIT_OK

    if args.trials is not None and args.trials < 1:
        print("--trials must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    if args.jobs < 1:
        print("--jobs must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.out is not None:
        overrides["output"] = args.out
    spec = dataclasses.replace(spec, **overrides)

    report = harness.run_experiment(spec, jobs=args.jobs)
    try:
        harness.write_csv(report, spec.output)
    except OSError as exc:
        print(exc, file=sys.stderr)
        return EXIT_RUNTIME
    harness.log_errors(report)
    print(f"{spec.scenario}: {len(report.rows)} rows -> {spec.output}"
          + (f" ({len(report.errors)} failed lattice points)" if report.errors else ""))
    return EXIT_RUNTIME if report.errors else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
