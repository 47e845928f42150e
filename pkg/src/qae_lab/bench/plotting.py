"""SVG plots rendered purely from result CSV files."""

import logging
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from .. import config  # noqa: E402
from ..exceptions import SchemaError  # noqa: E402

logger = logging.getLogger(__name__)

PLOT_KINDS = ("bounds", "sweep", "ci")
BOUND_LABELS = {
    "mlae_lower": "MLAE (lower bound)",
    "cp_upper": "IQAE Clopper-Pearson",
    "iqae_upper": "IQAE",
    "fae_upper": "FAE",
    "cmc_ref": "CMC",
}


def _read(csv_path: Path, required) -> pd.DataFrame:
    if not csv_path.is_file():
        raise SchemaError(f"Results file not found: {csv_path}")
    try:
        frame = pd.read_csv(csv_path, keep_default_na=False, na_values=[""])
    except pd.errors.EmptyDataError as e:
        raise SchemaError(f"{csv_path} is empty") from e
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise SchemaError(f"{csv_path} lacks columns {missing}")
    if frame.empty:
        raise SchemaError(f"{csv_path} has no rows")
    return frame


def _successful(frame: pd.DataFrame) -> pd.DataFrame:
    ok = frame[frame["error"].isna()] if "error" in frame else frame
    if ok.empty:
        raise SchemaError("No successful rows to plot")
    return ok


def _plot_bounds(frame: pd.DataFrame, ax) -> None:
    for column, label in BOUND_LABELS.items():
        ax.loglog(frame["epsilon"], frame[column], marker="o", markersize=3, label=label)
    ax.set_xlabel("target error epsilon")
    ax.set_ylabel("oracle queries")
    ax.invert_xaxis()


def _plot_sweep(frame: pd.DataFrame, ax, value_column: str, ylabel: str) -> None:
    ok = _successful(frame)
    # exact rows make no queries and have no place on a log axis
    ok = ok[ok["oracle_queries_A"] > 0]
    if ok.empty:
        raise SchemaError("No rows with oracle queries to plot")
    for (estimator, distribution, statistic), group in ok.groupby(
        ["estimator", "distribution", "statistic"], sort=True
    ):
        label = f"{estimator} {distribution} {statistic}"
        ax.scatter(group["oracle_queries_A"], group[value_column], s=6, alpha=0.3)
        means = group.groupby("budget")[["oracle_queries_A", value_column]].mean().sort_values("oracle_queries_A")
        ax.plot(means["oracle_queries_A"], means[value_column], marker="o", markersize=3, label=label)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("oracle queries (applications of A)")
    ax.set_ylabel(ylabel)


def plot_svg(csv_path: str | Path, kind: str, out_path: Optional[str | Path] = None) -> Path:
    """Render ``kind`` from ``csv_path`` into an SVG next to it (or at ``out_path``).

    Raises :class:`SchemaError` before writing anything if the CSV is empty or
    lacks the expected columns.
    """
    if kind not in PLOT_KINDS:
        raise ValueError(f"Unknown plot kind '{kind}'. Supported: {PLOT_KINDS}")
    csv_path = Path(csv_path)
    if kind == "bounds":
        frame = _read(csv_path, config.BOUNDS_COLUMNS)
    else:
        frame = _read(csv_path, config.SWEEP_COLUMNS)

    fig, ax = plt.subplots(figsize=(7, 5))
    try:
        if kind == "bounds":
            _plot_bounds(frame, ax)
            ax.set_title(f"Theoretical query bounds (alpha = {frame['alpha'].iloc[0]:g})")
        elif kind == "sweep":
            positive = frame.copy()
            # exact estimates are drawn at the floor of a log axis
            positive["relative_error"] = positive["relative_error"].clip(lower=1e-12)
            _plot_sweep(positive, ax, "relative_error", "relative error (%)")
            ax.set_title("Relative error vs oracle queries")
        else:
            positive = frame.copy()
            positive["ci_width"] = positive["ci_width"].clip(lower=1e-12)
            _plot_sweep(positive, ax, "ci_width", "confidence interval width")
            ax.set_title("Confidence interval width vs oracle queries")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(fontsize="small")
        out = Path(out_path) if out_path is not None else csv_path.with_name(f"{kind}.svg")
        out.parent.mkdir(parents=True, exist_ok=True)
        with matplotlib.rc_context({"svg.hashsalt": "qae-lab"}):
            fig.savefig(out, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
    logger.info(f"Wrote {kind} plot to {out}")
    return out
