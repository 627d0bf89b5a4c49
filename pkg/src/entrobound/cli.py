"""Command-line entry point.

One subcommand per experiment; parameters come from an optional JSON
config file with flag overrides on top (flags win).  The machine
output goes to --out when given (stdout otherwise); the human summary
goes to stdout alongside a written file, to stderr when the machine
text occupies stdout.  Exit codes: 0 on success, 2 when the
configuration fails validation, 3 when a verified property is breached.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigValidationError, PropertyViolationError
from .harness import EXPERIMENTS, ExperimentConfig, run


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated integers, got {text!r}")


_FLAGS = {
    "sigma-decay": (("--q", float), ("--n", int), ("--m-list", _int_list),
                    ("--samples", int)),
    "ball-entropy": (("--p", float), ("--n", int), ("--k-list", _int_list),
                     ("--samples", int)),
    "duality-check": (("--q", float), ("--n", int), ("--m", int),
                      ("--samples", int)),
    "mp-duality": (("--p", float), ("--subspace-dim", int),
                   ("--support-size", int), ("--trials", int)),
    "it1": (("--p", float), ("--subspace-dim", int), ("--support-size", int),
            ("--n", int), ("--k-list", _int_list), ("--samples", int)),
    "it2-octahedron": (("--q", float), ("--n", int), ("--k-list", _int_list),
                       ("--samples", int)),
}

_HELP = {
    "sigma-decay": "greedy m-term decay over octahedron samples",
    "ball-entropy": "entropy profile of the l_p unit ball in the max norm",
    "duality-check": "two-sided entropy sum comparison for hull and dual ball",
    "mp-duality": "uniform-norm constant by direct and dual routes",
    "it1": "entropy profile of a subspace L_p ball in a sample seminorm",
    "it2-octahedron": "constructive covers of the canonical atom hull",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entrobound",
        description="entropy-number experiments for atom hulls, balls, "
                    "and subspaces")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        cmd = sub.add_parser(name, help=_HELP[name])
        cmd.add_argument("--config", help="JSON config file")
        cmd.add_argument("--seed", type=int, help="random seed (required "
                         "here or in the config)")
        cmd.add_argument("--out", help="output file path")
        cmd.add_argument("--format", choices=("csv", "json"),
                         help="output format (default csv)")
        for flag, kind in _FLAGS[name]:
            cmd.add_argument(flag, type=kind)
    return parser


def _merge_config(args: argparse.Namespace) -> ExperimentConfig:
    doc: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigValidationError([f"config: cannot read ({exc})"])
        except json.JSONDecodeError as exc:
            raise ConfigValidationError([f"config: invalid JSON ({exc})"])
        if not isinstance(doc, dict):
            raise ConfigValidationError(["config: must hold a JSON object"])
    doc["experiment"] = args.experiment
    for key, value in vars(args).items():
        if key in ("experiment", "config") or value is None:
            continue
        doc[key] = value
    if "seed" not in doc:
        raise ConfigValidationError(
            ["seed: required (pass --seed or set it in the config)"])
    if "format" not in doc:
        doc["format"] = "csv"
    return ExperimentConfig.from_json(doc)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _merge_config(args)
        report, text = run(config)
    except ConfigValidationError as exc:
        for problem in exc.problems:
            print(f"error: {problem}", file=sys.stderr)
        return 2
    except PropertyViolationError as exc:
        print(f"property violation: {exc}", file=sys.stderr)
        return 3
    if config.out is None:
        sys.stdout.write(text)
        sys.stderr.write(report.summary_text())
    else:
        sys.stdout.write(report.summary_text())
        print(f"wrote {config.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
