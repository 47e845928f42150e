"""Amplitude estimators and the classical baseline."""

import logging
from typing import Callable, Dict

from ..exceptions import EstimationError
from ..grover import AmplitudeProblem, true_amplitude
from ..models import EstimationResult
from .base import EstimatorConfig, ShotLedger, finalize
from .bounds import TheoreticalBounds, required_cmc_samples, theoretical_bounds
from .canonical import canonical_qae, run_canonical
from .cmc import CMCResult, cmc
from .fae import fae
from .iqae import iqae
from .mlae import mle_maximize, mlae

logger = logging.getLogger(__name__)


def exact(problem: AmplitudeProblem, config: EstimatorConfig, seed) -> EstimationResult:
    """Exact statevector amplitude with no sampling and no queries."""
    a = true_amplitude(problem)
    return finalize(problem, ShotLedger(), a, (a, a), "exact", seed)


# Type hint for estimator runners
EstimatorFunction = Callable[[AmplitudeProblem, EstimatorConfig, object], EstimationResult]

ESTIMATOR_REGISTRY: Dict[str, EstimatorFunction] = {
    "canonical": run_canonical,
    "iqae": iqae,
    "mlae": mlae,
    "fae": fae,
    "exact": exact,
}


def get_estimator(name: str) -> EstimatorFunction:
    try:
        return ESTIMATOR_REGISTRY[name]
    except KeyError:
        raise EstimationError(
            f"Unknown estimator '{name}'. Available: {sorted(ESTIMATOR_REGISTRY)}"
        ) from None


__all__ = [
    "CMCResult",
    "ESTIMATOR_REGISTRY",
    "EstimatorConfig",
    "TheoreticalBounds",
    "canonical_qae",
    "cmc",
    "exact",
    "fae",
    "get_estimator",
    "iqae",
    "mle_maximize",
    "mlae",
    "required_cmc_samples",
    "theoretical_bounds",
]
