"""Closed-form sample-complexity bounds of the amplitude estimators and CMC.

Logarithms are natural except the inner base-2 logarithm.
"""

import math
from dataclasses import asdict, dataclass

from scipy.stats import norm


def _check(alpha: float, epsilon: float) -> None:
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if not 0 < epsilon < 0.5:
        raise ValueError(f"epsilon must lie in (0, 0.5), got {epsilon}")


def mlae_lower(alpha: float, epsilon: float) -> float:
    _check(alpha, epsilon)
    return math.sqrt(alpha * (1 - alpha)) / epsilon


def iqae_upper(alpha: float, epsilon: float) -> float:
    _check(alpha, epsilon)
    return 50 / epsilon * math.log(2 / alpha * math.log2(math.pi / (4 * epsilon)))


def cp_upper(alpha: float, epsilon: float) -> float:
    """Empirical Clopper-Pearson average-case bound for IQAE."""
    _check(alpha, epsilon)
    return 0.8 / epsilon * math.log(2 / alpha * math.log2(math.pi / (4 * epsilon)))


def fae_upper(alpha: float, epsilon: float) -> float:
    _check(alpha, epsilon)
    return 4.1e3 / epsilon * math.log(2 / alpha * math.log2(2 * math.pi / (3 * epsilon)))


def cmc_critical_value(alpha: float) -> float:
    """Two-sided normal critical value rounded to two decimals (1.96 at alpha = 0.05)."""
    return round(float(norm.ppf(1 - alpha / 2)), 2)


def required_cmc_samples(alpha: float, epsilon: float, s_n: float = 1.0) -> float:
    """``z^2 s_n^2 / epsilon^2``."""
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    return cmc_critical_value(alpha) ** 2 * s_n**2 / epsilon**2


@dataclass(frozen=True)
class TheoreticalBounds:
    epsilon: float
    alpha: float
    mlae_lower: float
    cp_upper: float
    iqae_upper: float
    fae_upper: float
    cmc_ref: float

    def to_dict(self) -> dict:
        return asdict(self)


def theoretical_bounds(alpha: float, epsilon: float, s_n: float = 1.0) -> TheoreticalBounds:
    return TheoreticalBounds(
        epsilon=epsilon,
        alpha=alpha,
        mlae_lower=mlae_lower(alpha, epsilon),
        cp_upper=cp_upper(alpha, epsilon),
        iqae_upper=iqae_upper(alpha, epsilon),
        fae_upper=fae_upper(alpha, epsilon),
        cmc_ref=required_cmc_samples(alpha, epsilon, s_n),
    )
