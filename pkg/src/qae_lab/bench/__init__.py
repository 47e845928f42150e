"""Experiment plans, sweeps, table reports and plots."""

from .plan import EstimatorEntry, ExperimentPlan, default_plan, load_plan
from .plotting import plot_svg
from .report import run_tables
from .runner import replay, row_seed, run_bounds, run_sweep

__all__ = [
    "EstimatorEntry",
    "ExperimentPlan",
    "default_plan",
    "load_plan",
    "plot_svg",
    "replay",
    "row_seed",
    "run_bounds",
    "run_sweep",
    "run_tables",
]
