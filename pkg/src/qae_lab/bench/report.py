"""Table reports: averaged estimates, levels and deviations per distribution and estimator."""

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from tqdm import tqdm

from .. import config
from ..distributions import discretize
from ..risk import estimate_statistic, estimate_with_cmc
from .plan import CMC, ExperimentPlan
from .runner import relative_error, row_seed

logger = logging.getLogger(__name__)


def _mean(values: List[Optional[float]]) -> Optional[float]:
    finite = [v for v in values if v is not None and not math.isnan(v)]
    return float(np.mean(finite)) if finite else None


def _table_cell(plan: ExperimentPlan, d: int, e: int, statistic: str) -> Dict[str, Any]:
    spec = plan.distributions[d]
    entry = plan.estimators[e]
    param, value = entry.budgets(plan.oracle_range)[0]
    dd = discretize(spec)
    seeds, reports, errors = [], [], []
    for rep in range(plan.repetitions):
        seed = row_seed(plan.seed, d, e, 0, rep)
        seeds.append(seed)
        try:
            if entry.name == CMC:
                report = estimate_with_cmc(
                    dd, statistic, entry.samples_for(param, value), seed, plan.level, plan.alpha, spec
                )
            else:
                report = estimate_statistic(
                    statistic, dd, entry.name, entry.config_for(param, value), seed, plan.level, spec
                )
            reports.append(report)
        except Exception as exc:
            logger.error(f"Table cell {spec.label}/{entry.name}/{statistic} rep {rep} failed: {exc}", exc_info=True)
            errors.append(f"{type(exc).__name__}: {exc}")

    classical = reports[0].classical_reference if reports else None
    continuous = reports[0].continuous_reference if reports else None
    estimate = _mean([r.estimate for r in reports])
    cell = {
        "distribution": spec.label,
        "estimator": entry.name,
        "statistic": statistic,
        "estimate": estimate,
        "achieved_level": _mean([r.achieved_level for r in reports]),
        "classical_reference": classical,
        "continuous_reference": continuous,
        "continuous_at_achieved": _mean([r.continuous_at_achieved for r in reports]),
        "delta_classical_pct": _mean(
            [relative_error(r.estimate, r.classical_reference) for r in reports]
        ),
        "delta_continuous_pct": _mean(
            [relative_error(r.estimate, r.continuous_reference) for r in reports if r.continuous_reference is not None]
        ),
        "grover_applications": _mean([r.grover_applications for r in reports]),
        "oracle_queries_A": _mean(
            [r.oracle_queries_A if r.results else r.classical_samples for r in reports]
        ),
        "max_circuit_depth": max((r.max_circuit_depth for r in reports), default=None),
        "flags": sorted({f for r in reports for f in r.flags}),
        "repetitions": plan.repetitions,
        "seeds": seeds,
        "errors": errors,
    }
    return cell


def format_tables(cells: List[Dict[str, Any]]) -> str:
    """Plain-text tables, one block per statistic."""
    frame = pd.DataFrame(cells)
    columns = [
        "distribution",
        "estimator",
        "estimate",
        "achieved_level",
        "classical_reference",
        "continuous_reference",
        "delta_classical_pct",
        "delta_continuous_pct",
        "grover_applications",
        "oracle_queries_A",
        "max_circuit_depth",
    ]
    blocks = []
    for statistic, group in frame.groupby("statistic", sort=False):
        blocks.append(f"== {statistic} ==")
        blocks.append(group[columns].to_string(index=False, float_format=lambda v: f"{v:.6g}"))
        blocks.append("")
    return "\n".join(blocks)


def run_tables(plan: ExperimentPlan, out_dir: Path, workers: int = 1) -> Dict[str, Any]:
    """Average ``plan.repetitions`` runs per distribution, estimator and statistic.

    Cells run on ``workers`` threads; their order and seeds do not depend on it.
    Writes ``tables.json`` and ``tables.txt`` to ``out_dir``.
    """
    jobs = [
        (d, e, statistic)
        for d in range(len(plan.distributions))
        for statistic in plan.statistics
        for e in range(len(plan.estimators))
    ]
    logger.info(f"Computing {len(jobs)} table cells with {workers} worker(s)")
    with ThreadPoolExecutor(max_workers=workers) as executor:
        cells = list(
            tqdm(executor.map(lambda job: _table_cell(plan, *job), jobs), total=len(jobs), desc="Table cells")
        )
    document = {
        "settings": {
            "alpha": plan.alpha,
            "level": plan.level,
            "repetitions": plan.repetitions,
            "seed": plan.seed,
            "estimators": [entry.model_dump() for entry in plan.estimators],
        },
        "cells": cells,
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / config.TABLES_JSON_NAME
    with open(json_path, "w", encoding="utf-8") as f:
        json.dump(document, f, indent=2, sort_keys=True)
    text_path = out_dir / config.TABLES_TEXT_NAME
    text_path.write_text(format_tables(cells), encoding="utf-8")
    logger.info(f"Wrote {len(cells)} table cells to {json_path} and {text_path}")
    return document
