"""Command-line entry point ``cone-lab``."""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import ConeLabError
from .harness import EXIT_INVALID, EXPERIMENTS, ExperimentConfig, run_experiment, write_report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cone-lab",
        description="Test flat-boundary-intersection and centrally-symmetric-section predicates on convex cones.",
    )
    parser.add_argument("experiment", choices=EXPERIMENTS)
    src = parser.add_mutually_exclusive_group(required=True)
    src.add_argument("--cone", metavar="FILE", help="cone definition (JSON)")
    src.add_argument(
        "--family",
        action="append",
        metavar="SPEC",
        help="kind:dims[:key=val,...], e.g. kgon:3:k=3-8; repeatable; 'standard' selects the reference mix",
    )
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--samples", type=int, default=64, help="boundary samples per section / curve")
    parser.add_argument("--interior-points", type=int, default=10)
    parser.add_argument("--hyperplanes", type=int, default=32, help="sections per CSS sweep / Hammer stress run")
    parser.add_argument("--tol", type=float, default=1e-6)
    parser.add_argument("--pass-threshold", type=float, default=1e-6)
    parser.add_argument("--fail-threshold", type=float, default=1e-4)
    parser.add_argument("--out", metavar="PATH", required=True, help="JSON report")
    parser.add_argument("--csv", metavar="PATH", help="flat CSV defect table")
    parser.add_argument("--trace", metavar="PATH", help="centroid-search iterates (JSON)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        config = ExperimentConfig(
            experiment=args.experiment,
            cone=args.cone,
            families=args.family or [],
            seed=args.seed,
            samples=args.samples,
            interior_points=args.interior_points,
            hyperplanes=args.hyperplanes,
            tol=args.tol,
            pass_threshold=args.pass_threshold,
            fail_threshold=args.fail_threshold,
            out=args.out,
            csv=args.csv,
            trace=args.trace,
        )
        result = run_experiment(config)
        write_report(result, config.out, config.csv, config.trace)
    except (ConeLabError, OSError) as exc:
        print(f"cone-lab: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if result.message:
        print(f"cone-lab: {result.message}", file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
