"""Mean, value at risk and conditional value at risk from amplitude estimates.

VaR is found by bisection over grid indices, each probe estimating
``P[X <= x_l]`` with the threshold objective. CVaR then estimates
``sum_{i <= l} (i / l) p_i`` and divides by the estimated tail probability.
"""

import logging
from typing import Callable, Optional, Union

import numpy as np

from . import config
from .distributions import (
    DiscretizedDistribution,
    DistributionSpec,
    check_level,
    classical_stats,
    continuous_at_level,
    continuous_mean,
    continuous_reference,
)
from .encoding import ObjectiveKind, to_value_domain
from .estimators import ESTIMATOR_REGISTRY, EstimatorConfig, cmc, get_estimator
from .exceptions import DegenerateTailError
from .grover import AmplitudeProblem
from .models import EstimationResult, Probe, RiskReport

logger = logging.getLogger(__name__)

Estimator = Union[str, Callable[[AmplitudeProblem, EstimatorConfig, object], EstimationResult]]

LEVEL_AMBIGUOUS = "level-ambiguous"
DEGENERATE_TAIL = "degenerate-tail"


def _resolve(estimator: Estimator):
    return get_estimator(estimator) if isinstance(estimator, str) else estimator


def _child_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2**63 - 1))


def estimate_mean(
    dd: DiscretizedDistribution,
    estimator: Estimator,
    estimator_config: Optional[EstimatorConfig] = None,
    seed=None,
    spec: Optional[DistributionSpec] = None,
) -> RiskReport:
    run = _resolve(estimator)
    estimator_config = estimator_config or EstimatorConfig()
    kind = ObjectiveKind.mean()
    problem = AmplitudeProblem.from_distribution(dd, kind)
    result = run(problem, estimator_config, seed)
    estimate = to_value_domain(result.a_hat, dd, kind)
    ci = (to_value_domain(result.ci[0], dd, kind), to_value_domain(result.ci[1], dd, kind))
    logger.info(f"Mean of {dd.label} via {result.algorithm}: {estimate:.6g}")
    return RiskReport(
        statistic="mean",
        estimate=estimate,
        ci=ci,
        results=[result],
        classical_reference=classical_stats(dd).mean,
        continuous_reference=continuous_mean(spec) if spec is not None else None,
    )


def estimate_var(
    dd: DiscretizedDistribution,
    level: float = config.DEFAULT_LEVEL,
    estimator: Estimator = "iqae",
    estimator_config: Optional[EstimatorConfig] = None,
    seed=None,
    spec: Optional[DistributionSpec] = None,
) -> RiskReport:
    """Smallest grid value whose estimated ``P[X <= x]`` reaches ``level``.

    The probe at the last index is structural (the threshold covers the whole
    grid) and is not sampled. Every probe shares ``estimator_config``.
    """
    check_level(level)
    run = _resolve(estimator)
    estimator_config = estimator_config or EstimatorConfig()
    rng = np.random.default_rng(seed)
    last = dd.n_points - 1
    probes = {}
    results = []

    def probe(index: int) -> Probe:
        if index == last:
            found = Probe(index, 1.0, (1.0, 1.0))
        else:
            problem = AmplitudeProblem.from_distribution(dd, ObjectiveKind.threshold(index))
            result = run(problem, estimator_config, _child_seed(rng))
            results.append(result)
            found = Probe(index, result.a_hat, result.ci)
        probes[index] = found
        logger.debug(f"VaR probe at index {index}: P={found.probability:.6f}")
        return found

    lo, hi = 0, last
    while lo < hi:
        mid = (lo + hi) // 2
        if probe(mid).probability >= level:
            hi = mid
        else:
            lo = mid + 1
    final = probes[lo] if lo in probes else probe(lo)

    flags = []
    candidates = [lo]
    if final.ci[0] < level <= final.ci[1] and lo < last:
        candidates.append(lo + 1)
    below = probes.get(lo - 1)
    if below is not None and below.ci[1] >= level:
        candidates.insert(0, lo - 1)
    if len(candidates) > 1:
        flags.append(LEVEL_AMBIGUOUS)
        logger.warning(
            f"VaR of {dd.label} at level {level} is ambiguous between grid indices {candidates}"
        )

    stats = classical_stats(dd)
    reference = continuous_reference(spec, level) if spec is not None else None
    at_achieved = continuous_at_level(spec, final.probability) if spec is not None else None
    value = float(dd.grid[lo])
    logger.info(
        f"VaR of {dd.label} at {level}: {value:.6g} (index {lo}, achieved level {final.probability:.4f})"
    )
    return RiskReport(
        statistic="var",
        estimate=value,
        ci=(float(dd.grid[min(candidates)]), float(dd.grid[max(candidates)])),
        results=results,
        classical_reference=stats.var(level),
        continuous_reference=reference.var if reference else None,
        achieved_level=final.probability,
        var_index=lo,
        continuous_at_achieved=at_achieved.var if at_achieved else None,
        probes=[probes[i] for i in sorted(probes)],
        flags=flags,
        candidates=[float(dd.grid[i]) for i in candidates],
    )


def estimate_cvar(
    dd: DiscretizedDistribution,
    level: float = config.DEFAULT_LEVEL,
    estimator: Estimator = "iqae",
    estimator_config: Optional[EstimatorConfig] = None,
    seed=None,
    spec: Optional[DistributionSpec] = None,
) -> RiskReport:
    """Lower-tail mean ``E[X | X <= VaR]`` from the VaR search plus one more estimate."""
    run = _resolve(estimator)
    estimator_config = estimator_config or EstimatorConfig()
    rng = np.random.default_rng(seed)
    var_report = estimate_var(dd, level, run, estimator_config, _child_seed(rng), spec)
    index = var_report.var_index
    tail_probability = var_report.achieved_level

    kind = ObjectiveKind.cvar(index)
    problem = AmplitudeProblem.from_distribution(dd, kind)
    result = run(problem, estimator_config, _child_seed(rng))

    flags = list(var_report.flags)
    try:
        estimate = to_value_domain(result.a_hat, dd, kind, tail_probability)
        ci = (
            to_value_domain(result.ci[0], dd, kind, tail_probability),
            to_value_domain(result.ci[1], dd, kind, tail_probability),
        )
    except DegenerateTailError as e:
        logger.warning(f"CVaR of {dd.label}: {e}")
        flags.append(DEGENERATE_TAIL)
        estimate, ci = float("nan"), (float("nan"), float("nan"))

    stats = classical_stats(dd)
    reference = continuous_reference(spec, level) if spec is not None else None
    at_achieved = continuous_at_level(spec, tail_probability) if spec is not None else None
    logger.info(f"CVaR of {dd.label} at {level}: {estimate:.6g}")
    return RiskReport(
        statistic="cvar",
        estimate=estimate,
        ci=ci,
        results=var_report.results + [result],
        classical_reference=stats.cvar(level),
        continuous_reference=reference.cvar if reference else None,
        achieved_level=tail_probability,
        var_index=index,
        continuous_at_achieved=at_achieved.cvar if at_achieved else None,
        probes=var_report.probes,
        flags=flags,
        candidates=var_report.candidates,
    )


RISK_STATISTICS = {"mean": estimate_mean, "var": estimate_var, "cvar": estimate_cvar}


def estimate_statistic(
    statistic: str,
    dd: DiscretizedDistribution,
    estimator: Estimator,
    estimator_config: Optional[EstimatorConfig] = None,
    seed=None,
    level: float = config.DEFAULT_LEVEL,
    spec: Optional[DistributionSpec] = None,
) -> RiskReport:
    if statistic not in RISK_STATISTICS:
        raise ValueError(f"Unknown statistic '{statistic}'. Supported: {sorted(RISK_STATISTICS)}")
    if statistic == "mean":
        return estimate_mean(dd, estimator, estimator_config, seed, spec)
    return RISK_STATISTICS[statistic](dd, level, estimator, estimator_config, seed, spec)


def estimate_with_cmc(
    dd: DiscretizedDistribution,
    statistic: str,
    n_samples: int,
    seed=None,
    level: float = config.DEFAULT_LEVEL,
    alpha: float = config.DEFAULT_ALPHA,
    spec: Optional[DistributionSpec] = None,
) -> RiskReport:
    """Classical Monte Carlo counterpart of :func:`estimate_statistic`."""
    result = cmc(dd, n_samples, seed, statistic, level, alpha)
    stats = classical_stats(dd)
    if statistic == "mean":
        classical = stats.mean
        continuous = continuous_mean(spec) if spec is not None else None
    else:
        classical = stats.var(level) if statistic == "var" else stats.cvar(level)
        reference = continuous_reference(spec, level) if spec is not None else None
        continuous = getattr(reference, statistic) if reference else None
    return RiskReport(
        statistic=statistic,
        estimate=result.estimate,
        ci=result.ci,
        results=[],
        classical_reference=classical,
        continuous_reference=continuous,
        classical_samples=n_samples,
    )


__all__ = [
    "ESTIMATOR_REGISTRY",
    "estimate_cvar",
    "estimate_mean",
    "estimate_statistic",
    "estimate_var",
    "estimate_with_cmc",
]
