"""Faster amplitude estimation with a fixed number of iterations.

Iteration ``j`` runs ``Q^(2^(j-1))`` so that ``c_j = cos(K_j theta) = 1 - 2 P``
with ``K_j = 2^(j+1) + 2``. While ``K_j theta`` is known to stay in [0, pi]
the angle follows from ``arccos`` alone (first stage). Once the interval
gets close to that limit the second stage also measures at the power
``2^(j-1) + 2^(j0-1)``, recovers ``sin(K_j theta)`` from the angle-addition
identity and with it the full angle.

By default the problem is rescaled so its good amplitude is ``a / 16``,
which keeps ``theta`` below ``arcsin(1/4)``. Without rescaling the first
stage assumes ``a <= 1/4``.
"""

import logging
import math
from typing import Tuple

import numpy as np

from ..grover import AmplitudeProblem, rescale
from ..models import EstimationResult
from .base import EstimatorConfig, ShotLedger, finalize, measure

logger = logging.getLogger(__name__)

RESCALE_FACTOR = 0.25
FIRST_STAGE_SHOT_FACTOR = 1944
SECOND_STAGE_SHOT_FACTOR = 972
SWITCH_ANGLE = 3 * math.pi / 8
SECOND_STAGE_WINDOW = math.pi / 3


def default_shots(delta: float) -> Tuple[int, int]:
    log_term = math.log(2 / delta)
    return (
        math.ceil(FIRST_STAGE_SHOT_FACTOR * log_term),
        math.ceil(SECOND_STAGE_SHOT_FACTOR * log_term),
    )


def chernoff_cos_width(shots: int, delta: float) -> float:
    """Half-width of the interval on ``c = 1 - 2P`` from ``shots`` samples."""
    return math.sqrt(12 * math.log(2 / delta) / shots)


def _estimate_cos(work: AmplitudeProblem, k: int, shots: int, rng, ledger: ShotLedger) -> float:
    hits = measure(work, k, shots, rng, ledger)
    return 1.0 - 2.0 * hits / shots


def fae(problem: AmplitudeProblem, config: EstimatorConfig, seed) -> EstimationResult:
    rng = np.random.default_rng(seed)
    delta = config.delta
    max_iter = config.max_iter
    if config.shots is not None:
        shots_first = shots_second = config.shots
    else:
        shots_first, shots_second = default_shots(delta)

    if config.rescale:
        work = rescale(problem, RESCALE_FACTOR)
        scale = RESCALE_FACTOR**2
        theta_max = math.asin(RESCALE_FACTOR)
    else:
        work = problem
        scale = 1.0
        theta_max = math.pi / 2

    ledger = ShotLedger()
    width_first = chernoff_cos_width(shots_first, delta)
    theta_ci = (0.0, theta_max)
    theta_hat = 0.0
    switch_iteration = None
    psi = 0.0
    history = []
    ambiguous = False

    for j in range(1, max_iter + 1):
        k = 2 ** (j - 1)
        scaling = 4 * k + 2
        if switch_iteration is None:
            c = _estimate_cos(work, k, shots_first, rng, ledger)
            c_lo, c_hi = max(c - width_first, -1.0), min(c + width_first, 1.0)
            new_ci = (math.acos(c_hi) / scaling, math.acos(c_lo) / scaling)
            lo, hi = max(theta_ci[0], new_ci[0]), min(theta_ci[1], new_ci[1])
            if lo > hi:
                # the new interval excludes every angle kept so far
                ambiguous = True
                logger.warning(f"FAE iteration {j}: interval {new_ci} disagrees with {theta_ci}")
                theta_ci = new_ci
            else:
                theta_ci = (lo, hi)
            theta_hat = math.acos(min(max(c, -1.0), 1.0)) / scaling
            history.append({"stage": 1, "k": k, "cos": c, "theta_ci": theta_ci})
            if 2 ** (j + 1) * theta_ci[1] >= SWITCH_ANGLE and j < max_iter:
                switch_iteration = j
                psi = 2 ** (j + 1) * (theta_ci[0] + theta_ci[1]) / 2
                logger.debug(f"FAE switches to the second stage after iteration {j}")
        else:
            offset = 2 ** (switch_iteration - 1)
            c1 = _estimate_cos(work, k, shots_second, rng, ledger)
            c2 = _estimate_cos(work, k + offset, shots_second, rng, ledger)
            if abs(math.sin(psi)) < 1e-12:
                ambiguous = True
                logger.warning(f"FAE iteration {j}: sin(psi) vanishes, the branch cannot be resolved")
                history.append({"stage": 2, "k": k, "cos": c1, "sin": None, "theta_ci": theta_ci})
                continue
            # cos(A + psi) = cos A cos psi - sin A sin psi
            s = (c1 * math.cos(psi) - c2) / math.sin(psi)
            rho = math.atan2(s, c1)
            previous_mid = (theta_ci[0] + theta_ci[1]) / 2
            turns = round((scaling * previous_mid - rho) / (2 * math.pi))
            angle = 2 * math.pi * turns + rho
            theta_hat = angle / scaling
            theta_ci = (
                max((angle - SECOND_STAGE_WINDOW) / scaling, 0.0),
                min((angle + SECOND_STAGE_WINDOW) / scaling, theta_max),
            )
            history.append({"stage": 2, "k": k, "cos": c1, "sin": s, "theta_ci": theta_ci})

    theta_hat = min(max(theta_hat, 0.0), theta_max)
    a_hat = math.sin(theta_hat) ** 2 / scale
    ci = (math.sin(theta_ci[0]) ** 2 / scale, math.sin(theta_ci[1]) ** 2 / scale)
    result = finalize(
        work,
        ledger,
        a_hat,
        ci,
        "fae",
        seed,
        converged=not ambiguous,
        extras={
            "iterations": history,
            "switch_iteration": switch_iteration,
            "rescaled": config.rescale,
            "ambiguous": ambiguous,
        },
    )
    return result
