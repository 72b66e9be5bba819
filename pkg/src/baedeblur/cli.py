"""Command-line entry points for the experiment pipeline.

Subcommands
-----------
run <config>
    Full experiment from a JSON config; artifacts land in its output_dir.
validate <config> --samples N
    Monte Carlo check of the error-covariance formula on a small grid.
sweep <config> --lengths L1 L2 ...
    Correlation-length study with shared seeds and an ordering check.
render <field.csv> <out-image>
    Re-render any stored field CSV as an 8-bit grayscale raster.

Exit codes: 0 success (all checks passed), 2 configuration or usage error,
3 documented method or check failure, 4 internal numerical failure.
Relative output directories can be relocated with the environment variable
``BAEDEBLUR_OUTPUT_ROOT``.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import ConfigError, ExperimentConfig
from .fieldio import read_field_csv, write_field_raster
from .linalg import FactorizationError
from .log_baseline import LogBaselineError
from .pipeline import run_experiment, sweep_correlation, validate_covariance
from .validation import QuadratureError

__all__ = ["main", "entry"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_METHOD = 3
EXIT_NUMERICAL = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="baedeblur",
        description="Deblurring under multiplicative and additive noise.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a full experiment from a config file")
    run_p.add_argument("config", help="path to a JSON experiment config")

    val_p = sub.add_parser("validate", help="Monte Carlo covariance check")
    val_p.add_argument("config", help="path to a JSON experiment config")
    val_p.add_argument(
        "--samples", type=int, default=100_000, help="number of error draws (>= 10000)"
    )

    sweep_p = sub.add_parser("sweep", help="correlation-length sweep")
    sweep_p.add_argument("config", help="path to a JSON experiment config")
    sweep_p.add_argument(
        "--lengths",
        type=float,
        nargs="+",
        required=True,
        help="correlation lengths in pixels (at least two)",
    )

    render_p = sub.add_parser("render", help="render a field CSV as a raster image")
    render_p.add_argument("field_csv", help="path to a field CSV")
    render_p.add_argument("out_image", help="output PNG path")
    return parser


def _load_config(path: str) -> ExperimentConfig:
    try:
        return ExperimentConfig.load(path)
    except FileNotFoundError as exc:
        raise ConfigError("<file>", f"config file not found: {path}") from exc


def _cmd_run(args) -> int:
    config = _load_config(args.config)
    result = run_experiment(config)
    coverage = result.manifest.get("coverage")
    print(f"run complete: {result.output_dir}")
    if coverage is not None:
        print(f"coverage={coverage:.4f}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    config = _load_config(args.config)
    if args.samples < 10_000:
        raise ConfigError("--samples", "must be at least 10000")
    check, report = validate_covariance(config, args.samples)
    for line in check.lines():
        print(line)
    print(f"report written: {report}")
    return EXIT_OK if check.passed else EXIT_METHOD


def _cmd_sweep(args) -> int:
    config = _load_config(args.config)
    if len(args.lengths) < 2:
        raise ConfigError("--lengths", "need at least two correlation lengths")
    if any(l <= 0.0 for l in args.lengths):
        raise ConfigError("--lengths", "lengths must be positive")
    result = sweep_correlation(config, list(args.lengths))
    for line in result.report_lines:
        print(line)
    return EXIT_OK if result.ordered else EXIT_METHOD


def _cmd_render(args) -> int:
    try:
        field = read_field_csv(args.field_csv)
    except FileNotFoundError as exc:
        raise ConfigError("<file>", f"field CSV not found: {args.field_csv}") from exc
    except ValueError as exc:
        raise ConfigError("<file>", f"not a readable field CSV: {exc}") from exc
    write_field_raster(field, args.out_image)
    print(f"rendered: {args.out_image}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    """Run the CLI; returns the exit code instead of calling sys.exit."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors, which matches our contract.
        return int(exc.code) if exc.code else EXIT_OK
    handlers = {
        "run": _cmd_run,
        "validate": _cmd_validate,
        "sweep": _cmd_sweep,
        "render": _cmd_render,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LogBaselineError as exc:
        print(f"method failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_METHOD
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FactorizationError, QuadratureError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def entry() -> None:
    """Console-script wrapper around `main`."""
    raise SystemExit(main())
