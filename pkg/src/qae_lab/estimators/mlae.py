"""Maximum-likelihood amplitude estimation over a schedule of Grover powers."""

import logging
import math
from typing import List, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import xlogy
from scipy.stats import chi2

from ..grover import AmplitudeProblem
from ..models import EstimationResult, Interval
from .base import EstimatorConfig, ShotLedger, critical_value, finalize, measure

logger = logging.getLogger(__name__)

GRID_POINTS_PER_PERIOD = 10_000
REFINE_XATOL = 1e-12


def build_schedule(config: EstimatorConfig) -> List[int]:
    """Explicit schedule, else ``[0, 1, 2, ..., 2^(max_iter-1)]`` or ``[0, 1, ..., max_iter]``."""
    if config.schedule is not None:
        return list(config.schedule)
    if config.schedule_kind == "linear":
        return list(range(config.max_iter + 1))
    return [0] + [2**j for j in range(config.max_iter)]


def log_likelihood(
    theta: np.ndarray | float, schedule: Sequence[int], shots: Sequence[int], hits: Sequence[int]
) -> np.ndarray:
    """Sum over powers of ``h log sin^2(K theta) + (N - h) log cos^2(K theta)``, ``K = 2m + 1``."""
    theta = np.asarray(theta, dtype=float)
    total = np.zeros_like(theta)
    for m, n, h in zip(schedule, shots, hits):
        k = 2 * m + 1
        total = total + xlogy(h, np.sin(k * theta) ** 2) + xlogy(n - h, np.cos(k * theta) ** 2)
    return total


def _grid(schedule: Sequence[int]) -> np.ndarray:
    n_points = GRID_POINTS_PER_PERIOD * (2 * max(schedule) + 1) + 1
    return np.linspace(0.0, math.pi / 2, n_points)


def mle_maximize(schedule: Sequence[int], shots: Sequence[int], hits: Sequence[int]) -> float:
    """Global maximizer of the log-likelihood in [0, pi/2].

    A grid with at least ``10^4 (2 max m + 1)`` points locates the mode
    (ties go to the smaller angle), then a bounded Brent search within one
    grid step refines it. With no shots at all the likelihood is flat and
    ``pi/4`` is returned.
    """
    if sum(shots) == 0:
        return math.pi / 4
    grid = _grid(schedule)
    values = log_likelihood(grid, schedule, shots, hits)
    best = int(np.argmax(values))
    theta_grid = float(grid[best])
    step = float(grid[1] - grid[0])

    def objective(t):
        v = float(log_likelihood(t, schedule, shots, hits))
        return -v if np.isfinite(v) else 1e300

    result = minimize_scalar(
        objective,
        bounds=(max(0.0, theta_grid - step), min(math.pi / 2, theta_grid + step)),
        method="bounded",
        options={"xatol": REFINE_XATOL},
    )
    if result.success and -result.fun > values[best]:
        return float(result.x)
    return theta_grid


def fisher_interval(
    theta: float, schedule: Sequence[int], shots: Sequence[int], hits: Sequence[int], alpha: float
) -> Interval:
    """Normal interval from the observed Fisher information, mapped to the amplitude."""
    information = 0.0
    for m, n, h in zip(schedule, shots, hits):
        k = 2 * m + 1
        s2, c2 = math.sin(k * theta) ** 2, math.cos(k * theta) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            term = 2 * k**2 * (np.divide(h, s2) + np.divide(n - h, c2))
        # expected information where the observed one is undefined at the boundary
        information += float(term) if np.isfinite(term) else 4 * k**2 * n
    if information <= 0:
        return 0.0, 1.0
    half_width = critical_value(alpha) / math.sqrt(information)
    lo = min(max(theta - half_width, 0.0), math.pi / 2)
    hi = min(max(theta + half_width, 0.0), math.pi / 2)
    return math.sin(lo) ** 2, math.sin(hi) ** 2


def likelihood_ratio_interval(
    theta: float, schedule: Sequence[int], shots: Sequence[int], hits: Sequence[int], alpha: float
) -> Interval:
    """Grid angles whose likelihood ratio to the maximum passes the chi-square test."""
    grid = _grid(schedule)
    values = log_likelihood(grid, schedule, shots, hits)
    best = float(log_likelihood(theta, schedule, shots, hits))
    accepted = grid[2 * (best - values) <= chi2.ppf(1 - alpha, df=1)]
    if accepted.size == 0:
        return math.sin(theta) ** 2, math.sin(theta) ** 2
    return float(np.sin(accepted.min()) ** 2), float(np.sin(accepted.max()) ** 2)


def mlae(problem: AmplitudeProblem, config: EstimatorConfig, seed) -> EstimationResult:
    rng = np.random.default_rng(seed)
    schedule = build_schedule(config)
    shots = [config.shots_per_round] * len(schedule)
    ledger = ShotLedger()
    hits = [measure(problem, m, n, rng, ledger) for m, n in zip(schedule, shots)]

    theta = mle_maximize(schedule, shots, hits)
    if config.ci_method == "likelihood_ratio":
        ci = likelihood_ratio_interval(theta, schedule, shots, hits, config.alpha)
    else:
        ci = fisher_interval(theta, schedule, shots, hits, config.alpha)
    a_hat = math.sin(theta) ** 2
    logger.debug(f"MLAE schedule {schedule}: hits {hits}, theta={theta:.8f}")
    return finalize(
        problem,
        ledger,
        a_hat,
        ci,
        "mlae",
        seed,
        extras={"schedule": schedule, "hits": hits, "theta": theta},
    )
