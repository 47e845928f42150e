"""Classical Monte Carlo baseline on the discretized distribution."""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .. import config
from ..distributions import DiscretizedDistribution, check_level
from ..models import Interval
from .base import critical_value

logger = logging.getLogger(__name__)

CMC_STATISTICS = ("mean", "var", "cvar")


@dataclass
class CMCResult:
    statistic: str
    estimate: float
    ci: Interval
    n_samples: int
    seed: Optional[int]

    @property
    def ci_width(self) -> float:
        return self.ci[1] - self.ci[0]


def cmc(
    dd: DiscretizedDistribution,
    n_samples: int,
    seed,
    statistic: str = "mean",
    level: float = config.DEFAULT_LEVEL,
    alpha: float = config.DEFAULT_ALPHA,
) -> CMCResult:
    """Plug-in estimate of ``statistic`` from ``n_samples`` draws of the grid.

    Intervals use the normal approximation: ``z s_n / sqrt(n)`` for the mean
    and the tail mean, order statistics around ``n * level`` for the quantile.
    """
    if n_samples < 2:
        raise ValueError(f"CMC needs at least 2 samples, got {n_samples}")
    if statistic not in CMC_STATISTICS:
        raise ValueError(f"Unknown statistic '{statistic}'. Supported: {CMC_STATISTICS}")
    rng = np.random.default_rng(seed)
    samples = dd.grid[rng.choice(dd.n_points, size=n_samples, p=dd.probs)]
    z = critical_value(alpha)

    if statistic == "mean":
        estimate = float(samples.mean())
        half_width = z * float(samples.std(ddof=1)) / math.sqrt(n_samples)
        ci = (estimate - half_width, estimate + half_width)
    else:
        check_level(level)
        ordered = np.sort(samples)
        rank = max(math.ceil(level * n_samples) - 1, 0)
        var_hat = float(ordered[rank])
        if statistic == "var":
            spread = z * math.sqrt(n_samples * level * (1 - level))
            lo = min(max(math.floor(n_samples * level - spread), 0), n_samples - 1)
            hi = min(max(math.ceil(n_samples * level + spread), 0), n_samples - 1)
            estimate = var_hat
            ci = (float(ordered[lo]), float(ordered[hi]))
        else:
            tail = ordered[ordered <= var_hat]
            estimate = float(tail.mean())
            half_width = z * float(tail.std(ddof=1)) / math.sqrt(tail.size) if tail.size > 1 else 0.0
            ci = (estimate - half_width, estimate + half_width)

    logger.debug(f"CMC {statistic} from {n_samples} samples: {estimate:.6g}")
    return CMCResult(
        statistic=statistic,
        estimate=estimate,
        ci=(min(ci[0], estimate), max(ci[1], estimate)),
        n_samples=n_samples,
        seed=None if seed is None or isinstance(seed, np.random.Generator) else int(seed),
    )
