"""Command-line entry point: ``carsroa {spectrum,heterodyne,verify,enhancement}``.

Exit codes: 0 success, 1 parse or validation failure, 2 verification
failure, 3 numerical non-convergence.
"""

import argparse
import sys

from ..quadrature import QuadratureNotConverged
from .config import ConfigValidationError, ParseError, parse_config, validate_config
from .run import run_enhancement, run_heterodyne, run_spectrum, run_verify, write_text

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_VERIFY_FAILED = 2
EXIT_NOT_CONVERGED = 3


def _seed(text):
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser():
    parser = argparse.ArgumentParser(prog="carsroa",
                                     description="Coherence-enhanced chiral Raman spectra.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("spectrum", "R/L spectrum with difference, sum and CID"),
                        ("heterodyne", "phase-cycled heterodyne signals"),
                        ("verify", "run the oracle suite for a configuration"),
                        ("enhancement", "coherent enhancement factor N|rho21|^2/rho11")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, help="YAML run configuration")
        p.add_argument("--out", help="output path (overrides the configuration)")
        p.add_argument("--seed", type=_seed, help="RNG seed (overrides the configuration)")
        p.add_argument("--samples", type=int, help="Monte Carlo sample count")
        p.add_argument("--no-timestamp", action="store_true",
                       help="omit the timestamp comment for byte-identical reruns")
    return parser


def _apply_overrides(cfg, args):
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.samples is not None:
        changes["n_samples"] = args.samples
    if args.out is not None:
        changes["output"] = args.out
    return validate_config(cfg.replace(**changes)) if changes else cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _apply_overrides(parse_config(args.config), args)
        stamp = not args.no_timestamp
        if args.command == "spectrum":
            run_spectrum(cfg, timestamp=stamp)
            print(f"spectrum written to {cfg.output}" if cfg.output else "spectrum computed")
        elif args.command == "heterodyne":
            res = run_heterodyne(cfg, timestamp=stamp)
            print(f"ratio_estimate = {res.ratio_estimate:.12e}")
        elif args.command == "verify":
            report = run_verify(cfg)
            text = report.text()
            sys.stdout.write(text)
            if cfg.output:
                write_text(cfg.output, text)
            if not report.ok:
                return EXIT_VERIFY_FAILED
        else:
            rho, ratio = run_enhancement(cfg)
            print(f"rho21(0) = {rho:.6e}")
            print(f"enhancement = {ratio:.6e}")
    except (ParseError, ConfigValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except QuadratureNotConverged as exc:
        print(f"error: quadrature did not converge: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
