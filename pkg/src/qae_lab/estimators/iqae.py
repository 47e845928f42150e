"""Iterative amplitude estimation.

Angles are tracked as fractions of the full circle, ``theta / (2 pi)``, so the
initial interval for ``theta_a`` in [0, pi/2] is [0, 1/4]. Each round picks the
largest power whose scaled interval stays inside one half of the circle,
measures, and narrows the interval with a Clopper-Pearson (or Chernoff)
bound at level ``alpha / T`` where ``T = ceil(log2(pi / (8 epsilon)))``.
"""

import logging
import math
from typing import Tuple

import numpy as np

from .. import config as settings
from ..grover import AmplitudeProblem
from ..models import EstimationResult
from .base import EstimatorConfig, ShotLedger, chernoff, clopper_pearson, finalize, measure

logger = logging.getLogger(__name__)


def round_budget(epsilon: float) -> int:
    """Number of rounds the confidence level is split over."""
    return max(1, math.ceil(math.log2(math.pi / (8 * epsilon))))


def find_next_k(
    k: int, upper_half_circle: bool, theta_interval: Tuple[float, float], min_ratio: float = 2.0
) -> Tuple[int, bool]:
    """Largest power whose scaled interval lies in one half-circle.

    Returns the previous ``k`` (and half-circle flag) when no power at least
    ``min_ratio`` times larger qualifies.
    """
    theta_l, theta_u = theta_interval
    old_scaling = 4 * k + 2
    max_scaling = int(1 / (2 * (theta_u - theta_l)))
    scaling = max_scaling - (max_scaling - 2) % 4

    while scaling >= min_ratio * old_scaling:
        theta_min = scaling * theta_l - int(scaling * theta_l)
        theta_max = scaling * theta_u - int(scaling * theta_u)
        if theta_min <= theta_max <= 0.5 and theta_min <= 0.5:
            return int((scaling - 2) / 4), True
        if theta_max >= 0.5 and theta_max >= theta_min >= 0.5:
            return int((scaling - 2) / 4), False
        scaling -= 4
    return int(k), upper_half_circle


def iqae(problem: AmplitudeProblem, config: EstimatorConfig, seed) -> EstimationResult:
    """Run IQAE until the amplitude interval is at most ``2 epsilon`` wide."""
    rng = np.random.default_rng(seed)
    shots = config.shots_per_round
    budget = round_budget(config.epsilon)
    ledger = ShotLedger()

    k = 0
    upper_half_circle = True
    theta_interval = (0.0, 0.25)
    a_interval = (0.0, 1.0)
    pooled_shots = pooled_hits = 0
    history = []
    converged = True

    while theta_interval[1] - theta_interval[0] > config.epsilon / math.pi:
        if ledger.rounds >= settings.MAX_ROUNDS:
            converged = False
            break
        previous_k = k
        k, upper_half_circle = find_next_k(k, upper_half_circle, theta_interval, config.min_ratio)
        k = min(k, settings.MAX_GROVER_POWER)
        hits = measure(problem, k, shots, rng, ledger)

        # consecutive rounds at the same power share their shots
        if ledger.rounds > 1 and k == previous_k:
            pooled_shots += shots
            pooled_hits += hits
        else:
            pooled_shots, pooled_hits = shots, hits

        if config.confint_method == "chernoff":
            a_min, a_max = chernoff(pooled_hits / pooled_shots, pooled_shots, config.alpha / budget)
        else:
            a_min, a_max = clopper_pearson(pooled_hits, pooled_shots, config.alpha / budget)

        if upper_half_circle:
            theta_min_i = np.arccos(1 - 2 * a_min) / 2 / np.pi
            theta_max_i = np.arccos(1 - 2 * a_max) / 2 / np.pi
        else:
            theta_min_i = 1 - np.arccos(1 - 2 * a_max) / 2 / np.pi
            theta_max_i = 1 - np.arccos(1 - 2 * a_min) / 2 / np.pi

        scaling = 4 * k + 2
        theta_u = (int(scaling * theta_interval[1]) + theta_max_i) / scaling
        theta_l = (int(scaling * theta_interval[0]) + theta_min_i) / scaling
        theta_interval = (float(theta_l), float(theta_u))
        a_interval = tuple(
            sorted((float(np.sin(2 * np.pi * theta_l) ** 2), float(np.sin(2 * np.pi * theta_u) ** 2)))
        )
        history.append({"k": k, "hits": hits, "shots": pooled_shots, "a_interval": a_interval})
        logger.debug(f"IQAE round {ledger.rounds}: k={k} hits={hits} a in {a_interval}")

    a_hat = float(np.mean(a_interval))
    return finalize(
        problem,
        ledger,
        a_hat,
        a_interval,
        "iqae",
        seed,
        converged=converged,
        extras={"rounds": history, "round_budget": budget},
    )
