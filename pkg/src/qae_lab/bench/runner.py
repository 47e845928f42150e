"""Sweep and bounds runners writing CSV results."""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from .. import config
from ..distributions import DiscretizedDistribution, discretize
from ..estimators import theoretical_bounds
from ..exceptions import PlanError
from ..models import RiskReport, SweepRow
from ..risk import estimate_statistic, estimate_with_cmc
from .plan import CMC, ExperimentPlan

logger = logging.getLogger(__name__)

SEED_MASK = (1 << 63) - 1


def row_seed(master_seed: int, distribution: int, estimator: int, budget: int, repetition: int) -> int:
    """First 63 bits of ``SeedSequence(master, spawn_key=(d, e, b, rep))``."""
    sequence = np.random.SeedSequence(master_seed, spawn_key=(distribution, estimator, budget, repetition))
    return int(sequence.generate_state(1, dtype=np.uint64)[0]) & SEED_MASK


@dataclass(frozen=True)
class RowTask:
    distribution: int
    statistic: str
    estimator: int
    budget: int
    repetition: int

    @property
    def row_key(self) -> str:
        return (
            f"d{self.distribution:02d}-{self.statistic}-e{self.estimator:02d}"
            f"-b{self.budget:03d}-r{self.repetition:03d}"
        )

    @classmethod
    def from_key(cls, key: str) -> "RowTask":
        try:
            d, statistic, e, b, r = key.split("-")
            return cls(int(d[1:]), statistic, int(e[1:]), int(b[1:]), int(r[1:]))
        except ValueError as exc:
            raise PlanError(f"Malformed row key '{key}'") from exc


def relative_error(estimate: float, reference: float) -> float:
    """Percent error against ``reference``; absolute error (in percent) when it is zero."""
    if reference == 0:
        return abs(estimate) * 100.0
    return abs(estimate - reference) / abs(reference) * 100.0


def plan_tasks(plan: ExperimentPlan) -> List[RowTask]:
    tasks = []
    for d in range(len(plan.distributions)):
        for statistic in plan.statistics:
            for e, entry in enumerate(plan.estimators):
                for b in range(len(entry.budgets(plan.oracle_range))):
                    for rep in range(plan.repetitions):
                        tasks.append(RowTask(d, statistic, e, b, rep))
    return tasks


def run_row(
    plan: ExperimentPlan, task: RowTask, dd: Optional[DiscretizedDistribution] = None
) -> SweepRow:
    """Run one (distribution, statistic, estimator, budget, repetition) cell.

    Failures are logged and stored in the row's ``error`` column.
    """
    try:
        spec = plan.distributions[task.distribution]
        entry = plan.estimators[task.estimator]
        param, value = entry.budgets(plan.oracle_range)[task.budget]
    except IndexError as exc:
        raise PlanError(f"Row {task.row_key} does not exist in this plan") from exc

    seed = row_seed(plan.seed, task.distribution, task.estimator, task.budget, task.repetition)
    row = SweepRow(
        row_key=task.row_key,
        estimator=entry.name,
        distribution=spec.label,
        statistic=task.statistic,
        budget_param=param,
        budget=value,
        repetition=task.repetition,
        seed=seed,
    )
    try:
        dd = dd if dd is not None else discretize(spec)
        if entry.name == CMC:
            n_samples = entry.samples_for(param, value)
            report = estimate_with_cmc(dd, task.statistic, n_samples, seed, plan.level, plan.alpha, spec)
            row.oracle_queries_A = n_samples
            row.shots_total = n_samples
        else:
            report = estimate_statistic(
                task.statistic, dd, entry.name, entry.config_for(param, value), seed, plan.level, spec
            )
            _fill_counters(row, report)
        row.estimate = report.estimate
        row.reference = report.classical_reference
        row.relative_error = relative_error(report.estimate, report.classical_reference)
        row.ci_low, row.ci_high = report.ci
        row.ci_width = report.ci[1] - report.ci[0]
    except Exception as e:
        logger.error(f"Row {task.row_key} failed: {e}", exc_info=True)
        row.error = f"{type(e).__name__}: {e}"
    return row


def _fill_counters(row: SweepRow, report: RiskReport) -> None:
    row.grover_applications = report.grover_applications
    row.oracle_queries_A = report.oracle_queries_A
    row.shots_total = report.shots_total
    row.max_k = report.max_k
    row.max_circuit_depth = report.max_circuit_depth
    row.converged = report.converged


def rows_to_frame(rows: Sequence[SweepRow]) -> pd.DataFrame:
    ordered = sorted(rows, key=lambda r: r.row_key)
    return pd.DataFrame([r.to_dict() for r in ordered], columns=config.SWEEP_COLUMNS)


def run_sweep(plan: ExperimentPlan, out_dir: Path, workers: int = 1) -> pd.DataFrame:
    """Run every row of ``plan`` and write ``sweep.csv`` sorted by row key."""
    tasks = plan_tasks(plan)
    distributions: Dict[int, DiscretizedDistribution] = {}
    for d, spec in enumerate(plan.distributions):
        try:
            distributions[d] = discretize(spec)
        except Exception as e:
            # rows of this distribution record the error themselves
            logger.error(f"Cannot discretize {spec.label}: {e}")

    logger.info(f"Running {len(tasks)} sweep rows with {workers} worker(s)")
    rows: List[SweepRow] = []
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(run_row, plan, t, distributions.get(t.distribution)) for t in tasks]
        for future in tqdm(as_completed(futures), total=len(futures), desc="Sweep rows"):
            rows.append(future.result())

    frame = rows_to_frame(rows)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / config.SWEEP_CSV_NAME
    frame.to_csv(path, index=False)
    failed = int((frame["error"] != "").sum())
    logger.info(f"Wrote {len(frame)} rows to {path} ({failed} failed)")
    return frame


def run_bounds(alpha: float, epsilons: Sequence[float], out_dir: Path, s_n: float = 1.0) -> pd.DataFrame:
    """One row of closed-form bounds per epsilon; no simulation."""
    if not epsilons:
        raise PlanError("The epsilon grid for the bounds is empty")
    frame = pd.DataFrame(
        [theoretical_bounds(alpha, eps, s_n).to_dict() for eps in epsilons],
        columns=config.BOUNDS_COLUMNS,
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / config.BOUNDS_CSV_NAME
    frame.to_csv(path, index=False)
    logger.info(f"Wrote {len(frame)} bound rows to {path}")
    return frame


def replay(plan: ExperimentPlan, row_key: str) -> SweepRow:
    """Recompute a single sweep row from its key."""
    task = RowTask.from_key(row_key)
    if task.statistic not in plan.statistics:
        raise PlanError(f"Statistic '{task.statistic}' of row {row_key} is not in the plan")
    logger.info(f"Replaying row {row_key}")
    return run_row(plan, task)
