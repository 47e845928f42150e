"""Shared pieces of the amplitude estimators: config, shot accounting, intervals."""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy.stats import beta, norm

from .. import config
from ..grover import AmplitudeProblem
from ..models import EstimationResult, Interval

logger = logging.getLogger(__name__)


class EstimatorConfig(BaseModel):
    """Algorithm knobs. Each estimator reads the fields it needs."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    epsilon: float = Field(default=config.DEFAULT_EPSILON, gt=0, lt=0.5)
    alpha: float = Field(default=config.DEFAULT_ALPHA, gt=0, lt=1)
    # None lets FAE derive its shot counts from delta
    shots: Optional[int] = Field(default=None, ge=1)
    max_iter: int = Field(default=config.DEFAULT_MAX_ITER, ge=1, le=20)

    # canonical QAE
    m: int = Field(default=5, ge=1, le=10)

    # IQAE
    confint_method: Literal["beta", "chernoff"] = "beta"
    min_ratio: float = Field(default=2.0, gt=1)

    # MLAE
    schedule_kind: Literal["exponential", "linear"] = "exponential"
    schedule: Optional[List[int]] = None
    ci_method: Literal["fisher", "likelihood_ratio"] = "fisher"

    # FAE
    delta: float = Field(default=0.01, gt=0, lt=1)
    rescale: bool = True

    @field_validator("schedule")
    @classmethod
    def _schedule_nondecreasing(cls, v):
        if v is None:
            return v
        if not v:
            raise ValueError("schedule must not be empty")
        if any(k < 0 for k in v) or any(b < a for a, b in zip(v, v[1:])):
            raise ValueError(f"schedule must be nonnegative and nondecreasing, got {v}")
        return v

    @property
    def shots_per_round(self) -> int:
        return self.shots if self.shots is not None else config.DEFAULT_SHOTS


@dataclass
class ShotLedger:
    """Every circuit execution as (grover power k, shots, good outcomes)."""

    records: List[Tuple[int, int, int]] = field(default_factory=list)

    def record(self, k: int, shots: int, hits: int) -> None:
        self.records.append((k, shots, hits))

    @property
    def oracle_queries_A(self) -> int:
        return sum(shots * (2 * k + 1) for k, shots, _ in self.records)

    @property
    def grover_applications(self) -> int:
        return sum(shots * k for k, shots, _ in self.records)

    @property
    def shots_total(self) -> int:
        return sum(shots for _, shots, _ in self.records)

    @property
    def rounds(self) -> int:
        return len(self.records)

    @property
    def max_k(self) -> int:
        return max((k for k, _, _ in self.records), default=0)


def measure(
    problem: AmplitudeProblem, k: int, shots: int, rng: np.random.Generator, ledger: ShotLedger
) -> int:
    hits = problem.measure_good(k, shots, rng)
    ledger.record(k, shots, hits)
    return hits


def clopper_pearson(hits: int, shots: int, alpha: float) -> Interval:
    """Exact binomial interval at confidence ``1 - alpha``."""
    lower = 0.0 if hits == 0 else float(beta.ppf(alpha / 2, hits, shots - hits + 1))
    upper = 1.0 if hits == shots else float(beta.ppf(1 - alpha / 2, hits + 1, shots - hits))
    return lower, upper


def chernoff(p_hat: float, shots: int, alpha: float) -> Interval:
    """Chernoff-Hoeffding interval around ``p_hat`` at confidence ``1 - alpha``."""
    half_width = math.sqrt(math.log(2 / alpha) / (2 * shots))
    return max(0.0, p_hat - half_width), min(1.0, p_hat + half_width)


def critical_value(alpha: float) -> float:
    return float(norm.ppf(1 - alpha / 2))


def finalize(
    problem: AmplitudeProblem,
    ledger: ShotLedger,
    a_hat: float,
    ci: Interval,
    algorithm: str,
    seed: Optional[int],
    converged: bool = True,
    extras: Optional[Dict[str, Any]] = None,
    depth_power: Optional[int] = None,
) -> EstimationResult:
    """Clip to [0, 1], make ``ci`` contain ``a_hat`` and attach the counters."""
    a_hat = float(min(max(a_hat, 0.0), 1.0))
    lo = float(min(max(ci[0], 0.0), a_hat))
    hi = float(max(min(ci[1], 1.0), a_hat))
    power = ledger.max_k if depth_power is None else depth_power
    depth = problem.metrics_for_power(power).depth
    if not converged:
        logger.warning(f"{algorithm} did not converge after {ledger.rounds} rounds")
    result = EstimationResult(
        a_hat=a_hat,
        ci=(lo, hi),
        oracle_queries_A=ledger.oracle_queries_A,
        grover_applications=ledger.grover_applications,
        shots_total=ledger.shots_total,
        rounds=ledger.rounds,
        max_circuit_depth=depth,
        max_k=ledger.max_k,
        seed=None if seed is None or isinstance(seed, np.random.Generator) else int(seed),
        algorithm=algorithm,
        converged=converged,
        extras=extras or {},
    )
    logger.debug(
        f"{algorithm}: a_hat={a_hat:.6f} ci=[{lo:.6f}, {hi:.6f}] "
        f"grover={result.grover_applications} rounds={result.rounds}"
    )
    return result
