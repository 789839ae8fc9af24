"""Command-line entry point.

Subcommands: run, compare-arch, compare-opt, ablate, report.
Exit codes: 0 success, 2 config validation failure, 3 dataset error,
4 training divergence, 5 partial-suite failure.
"""

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .errors import (
    ConfigError,
    DatasetLayoutError,
    DecodeError,
    DivergenceError,
    EmptyClassError,
    InsufficientDataError,
    LesionTLError,
    PartialSuiteError,
    StratificationError,
)
from .evaluation import aggregate_reports, render_comparison_text, write_comparison_csv
from .experiment import ExperimentConfig, describe_plan, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATASET = 3
EXIT_DIVERGENCE = 4
EXIT_PARTIAL = 5

_DATASET_ERRORS = (
    DatasetLayoutError,
    EmptyClassError,
    DecodeError,
    StratificationError,
    InsufficientDataError,
)

_SUITE_BY_COMMAND = {
    "run": None,  # use the config's suite
    "compare-arch": "compare_architectures",
    "compare-opt": "compare_optimizers",
    "ablate": "ablation",
}


def _add_run_flags(parser):
    parser.add_argument("--config", required=True, help="experiment config JSON file")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--output-dir", default=None, help="override the config output directory")
    parser.add_argument(
        "--dry-run", action="store_true", help="validate the config and print the plan without training"
    )
    parser.add_argument("--jobs", type=int, default=1, help="parallel worker processes for suite members")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lesiontl",
        description="Two-class skin-lesion transfer-learning experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command, help_text in (
        ("run", "execute the suite configured in the config file"),
        ("compare-arch", "run all three architectures and emit a comparison table"),
        ("compare-opt", "run adam vs sgd and emit an overlaid learning-curve plot"),
        ("ablate", "run the head-layer ablation suite"),
    ):
        p = sub.add_parser(command, help=help_text)
        _add_run_flags(p)
    p = sub.add_parser("report", help="aggregate stored run reports into a comparison table")
    p.add_argument("reports", nargs="+", help="report.json files to aggregate")
    p.add_argument("--output-dir", default=None, help="where to write comparison.csv/.txt")
    return parser


def _load_config(args):
    overrides = {"seed": args.seed, "output_dir": args.output_dir}
    config = ExperimentConfig.from_file(args.config, overrides=overrides)
    forced = _SUITE_BY_COMMAND[args.command]
    if forced and config.suite != forced:
        config = replace(config, suite=forced)
    return config


def _cmd_run(args):
    config = _load_config(args)
    if args.dry_run:
        print(describe_plan(config))
        return EXIT_OK
    artifacts = run_experiment(config, jobs=args.jobs)
    print(f"run complete: {artifacts.report_path}")
    return EXIT_OK


def _cmd_report(args):
    reports = []
    for path in args.reports:
        reports.append(json.loads(Path(path).read_text(encoding="utf-8")))
    rows = aggregate_reports(reports)
    text = render_comparison_text(rows)
    if args.output_dir:
        out = Path(args.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_comparison_csv(rows, out / "comparison.csv")
        (out / "comparison.txt").write_text(text, encoding="utf-8")
    print(text, end="")
    return EXIT_OK


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "report":
            return _cmd_report(args)
        return _cmd_run(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _DATASET_ERRORS as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return EXIT_DATASET
    except DivergenceError as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except PartialSuiteError as exc:
        print(f"partial suite failure: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
    except LesionTLError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
