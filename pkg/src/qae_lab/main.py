#!/usr/bin/env python3
"""Command-line entry point: ``qae-lab {bounds,sweep,tables,plot,replay}``."""
import argparse
import logging
import math
import sys
from pathlib import Path

import pandas as pd
from dotenv import find_dotenv, load_dotenv

from . import config
from .bench import default_plan, load_plan, plot_svg, replay, run_bounds, run_sweep, run_tables
from .bench.plan import ExperimentPlan
from .bench.plotting import PLOT_KINDS
from .exceptions import QAELabError

logger = logging.getLogger(__name__)

# Columns a replayed row must reproduce exactly
REPLAY_COLUMNS = [
    "seed",
    "grover_applications",
    "oracle_queries_A",
    "shots_total",
    "max_k",
    "estimate",
    "ci_low",
    "ci_high",
]


def setup_logging(verbose: bool = False, level: str = config.LOG_LEVEL) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else level,
        format=config.LOG_FORMAT,
        handlers=[logging.StreamHandler(sys.stdout)],
    )


def parse_args(argv=None) -> argparse.Namespace:
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(
        prog="qae-lab",
        description="Quantum amplitude estimation lab: bounds, sweeps, tables and plots",
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="Enable verbose logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_plan_options(p: argparse.ArgumentParser) -> None:
        p.add_argument("--plan", type=str, help="Experiment plan JSON (defaults to the table settings)")
        p.add_argument("--out", type=str, help="Output directory (overrides the plan)")
        p.add_argument("--seed", type=int, help="Master seed (overrides the plan)")

    bounds = sub.add_parser("bounds", help="Closed-form query bounds per epsilon")
    add_plan_options(bounds)
    bounds.add_argument("--alpha", type=float, help="Confidence parameter (overrides the plan)")
    bounds.add_argument("--epsilons", type=float, nargs="+", help="Target errors (overrides the plan)")

    sweep = sub.add_parser("sweep", help="Error vs oracle queries sweep")
    add_plan_options(sweep)
    sweep.add_argument("--workers", type=int, help="Worker threads (default: $QAE_LAB_WORKERS or 1)")

    tables = sub.add_parser("tables", help="Averaged mean/VaR/CVaR tables")
    add_plan_options(tables)
    tables.add_argument("--workers", type=int, help="Worker threads (default: $QAE_LAB_WORKERS or 1)")

    plot = sub.add_parser("plot", help="Render an SVG from a results CSV")
    plot.add_argument("--csv", type=str, required=True, help="bounds.csv or sweep.csv")
    plot.add_argument("--kind", choices=PLOT_KINDS, default="sweep")
    plot.add_argument("--out", type=str, help="SVG path (defaults to <kind>.svg next to the CSV)")

    rerun = sub.add_parser("replay", help="Recompute one sweep row from its key")
    add_plan_options(rerun)
    rerun.add_argument("--row-key", type=str, required=True, help="row_key column of sweep.csv")
    rerun.add_argument("--csv", type=str, help="sweep.csv to compare the recomputed row against")

    args = parser.parse_args(argv)
    if getattr(args, "seed", None) is not None and not 0 <= args.seed < 2**64:
        parser.error(f"--seed must be an unsigned 64-bit integer, got {args.seed}")
    if getattr(args, "workers", None) is not None and args.workers < 1:
        parser.error(f"--workers must be at least 1, got {args.workers}")
    return args


def resolve_plan(args: argparse.Namespace) -> ExperimentPlan:
    plan = load_plan(args.plan) if args.plan else default_plan()
    if args.seed is not None:
        plan = plan.model_copy(update={"seed": args.seed})
    return plan


def resolve_out_dir(args: argparse.Namespace, plan: ExperimentPlan) -> Path:
    if args.out:
        return Path(args.out)
    if plan.output_dir:
        return Path(plan.output_dir)
    return config.Config().output_dir


def cmd_bounds(args: argparse.Namespace) -> int:
    plan = resolve_plan(args)
    alpha = args.alpha if args.alpha is not None else plan.alpha
    epsilons = args.epsilons or plan.bounds_epsilons
    run_bounds(alpha, epsilons, resolve_out_dir(args, plan))
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    plan = resolve_plan(args)
    workers = args.workers or plan.workers
    settings = config.Config(workers=workers)
    frame = run_sweep(plan, resolve_out_dir(args, plan), settings.workers)
    failed = frame[frame["error"] != ""]
    if not failed.empty:
        logger.error(f"{len(failed)} sweep row(s) failed: {list(failed['row_key'])}")
        return 1
    return 0


def cmd_tables(args: argparse.Namespace) -> int:
    plan = resolve_plan(args)
    settings = config.Config(workers=args.workers or plan.workers)
    document = run_tables(plan, resolve_out_dir(args, plan), settings.workers)
    failed = [c for c in document["cells"] if c["errors"]]
    if failed:
        logger.error(f"{len(failed)} table cell(s) had failed repetitions")
        return 1
    return 0


def cmd_plot(args: argparse.Namespace) -> int:
    plot_svg(args.csv, args.kind, args.out)
    return 0


def _same(stored, recomputed) -> bool:
    if isinstance(recomputed, float) or isinstance(stored, float):
        if recomputed is None or pd.isna(stored):
            return recomputed is None and pd.isna(stored)
        return math.isclose(float(stored), float(recomputed), rel_tol=1e-12, abs_tol=1e-15)
    return stored == recomputed


def cmd_replay(args: argparse.Namespace) -> int:
    plan = resolve_plan(args)
    row = replay(plan, args.row_key)
    logger.info(f"Replayed {row.row_key}: estimate={row.estimate} seed={row.seed} error='{row.error}'")
    if row.error:
        return 1
    if not args.csv:
        return 0
    stored = pd.read_csv(args.csv, keep_default_na=False, na_values=[""])
    match = stored[stored["row_key"] == args.row_key]
    if match.empty:
        logger.error(f"Row {args.row_key} not found in {args.csv}")
        return 1
    record = match.iloc[0]
    recomputed = row.to_dict()
    mismatches = [c for c in REPLAY_COLUMNS if not _same(record[c], recomputed[c])]
    if mismatches:
        logger.error(f"Replayed row differs from {args.csv} in {mismatches}")
        return 1
    logger.info(f"Replayed row matches {args.csv}")
    return 0


COMMANDS = {
    "bounds": cmd_bounds,
    "sweep": cmd_sweep,
    "tables": cmd_tables,
    "plot": cmd_plot,
    "replay": cmd_replay,
}


def main(argv=None):
    """Execute the main application logic."""
    load_dotenv(find_dotenv(usecwd=True))
    args = parse_args(argv)
    try:
        settings = config.Config()
    except ValueError as e:
        setup_logging(args.verbose)
        logger.error(f"Invalid configuration: {e}")
        sys.exit(1)
    settings.apply()
    setup_logging(args.verbose, settings.log_level)
    logger.info(f"Starting qae-lab {args.command}")

    try:
        status = COMMANDS[args.command](args)
    except QAELabError as e:
        logger.error(f"{args.command} failed: {e}")
        sys.exit(1)
    except Exception as e:
        logger.error(f"Unexpected error in {args.command}: {e}", exc_info=True)
        sys.exit(1)

    if status:
        sys.exit(status)
    logger.info(f"{args.command} completed successfully")
    return 0


if __name__ == "__main__":
    main()
