"""Distributions discretized onto 2^n grid points and their classical statistics.

The classical statistics computed here are the brute-force reference every
estimator is compared against.
"""

import logging
from dataclasses import dataclass
from typing import Annotated, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, field_validator, model_validator
from scipy import stats

from . import config
from .exceptions import DegenerateTailError, DistributionError

logger = logging.getLogger(__name__)

# Qubit counts above this make the state-indexed objectives impractically large
MAX_DISTRIBUTION_QUBITS = 12
WEIBULL_UPPER_QUANTILE = 0.999
NORMAL_HALF_WIDTH = 3.0


class _SpecBase(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_qubits: int = Field(default=config.DEFAULT_N_QUBITS, ge=1, le=MAX_DISTRIBUTION_QUBITS)
    bounds: Optional[Tuple[float, float]] = None
    name: Optional[str] = None

    @field_validator("bounds")
    @classmethod
    def _bounds_increasing(cls, v):
        if v is not None and not v[0] < v[1]:
            raise ValueError(f"bounds must satisfy lo < hi, got {v}")
        return v

    @property
    def n_points(self) -> int:
        return 1 << self.n_qubits

    @property
    def label(self) -> str:
        return self.name or self._default_label()

    def _default_label(self) -> str:  # pragma: no cover - overridden
        raise NotImplementedError

    def with_qubits(self, n_qubits: int):
        return self.model_copy(update={"n_qubits": n_qubits})


class NormalSpec(_SpecBase):
    kind: Literal["normal"] = "normal"
    mu: float
    sigma: float = Field(gt=0)

    def _default_label(self) -> str:
        return f"N({self.mu:g}, {self.sigma:g})"

    def frozen_dist(self):
        return stats.norm(loc=self.mu, scale=self.sigma)

    def grid_bounds(self) -> Tuple[float, float]:
        if self.bounds is not None:
            return self.bounds
        return (self.mu - NORMAL_HALF_WIDTH * self.sigma, self.mu + NORMAL_HALF_WIDTH * self.sigma)


class WeibullSpec(_SpecBase):
    """Weibull with shape ``beta`` and unit scale."""

    kind: Literal["weibull"] = "weibull"
    beta: float = Field(gt=0)

    def _default_label(self) -> str:
        return f"W({self.beta:g})"

    def frozen_dist(self):
        return stats.weibull_min(self.beta)

    def grid_bounds(self) -> Tuple[float, float]:
        if self.bounds is not None:
            return self.bounds
        return (0.0, float(self.frozen_dist().ppf(WEIBULL_UPPER_QUANTILE)))


class UniformSpec(_SpecBase):
    """Uniform on the half-open interval [a, b)."""

    kind: Literal["uniform"] = "uniform"
    a: float = 0.0
    b: float = 1.0

    @model_validator(mode="after")
    def _check_interval(self):
        if not self.a < self.b:
            raise ValueError(f"uniform needs a < b, got a={self.a}, b={self.b}")
        return self

    def _default_label(self) -> str:
        return f"U({self.a:g}, {self.b:g})"

    def frozen_dist(self):
        return stats.uniform(loc=self.a, scale=self.b - self.a)

    def grid_bounds(self) -> Tuple[float, float]:
        return (self.a, self.b)


class PointSpec(_SpecBase):
    """All probability on ``value`` (the first grid point of [value, value + 1])."""

    kind: Literal["point"] = "point"
    value: float

    def _default_label(self) -> str:
        return f"Point({self.value:g})"

    def frozen_dist(self):
        return None

    def grid_bounds(self) -> Tuple[float, float]:
        return (self.value, self.value + 1.0)


DistributionSpec = Annotated[
    Union[NormalSpec, WeibullSpec, UniformSpec, PointSpec], Field(discriminator="kind")
]
_SPEC_ADAPTER = TypeAdapter(DistributionSpec)


def parse_spec(data: dict) -> DistributionSpec:
    """Validate a plain mapping (e.g. from a plan file) into a spec."""
    return _SPEC_ADAPTER.validate_python(data)


@dataclass(frozen=True, eq=False)
class DiscretizedDistribution:
    grid: np.ndarray
    probs: np.ndarray
    label: str = ""

    def __post_init__(self):
        grid = np.array(self.grid, dtype=float)
        probs = np.array(self.probs, dtype=float)
        if grid.shape != probs.shape or grid.ndim != 1:
            raise DistributionError(f"grid {grid.shape} and probs {probs.shape} must be equal 1-D")
        n = grid.size
        if n < 2 or n & (n - 1):
            raise DistributionError(f"Number of grid points must be a power of two >= 2, got {n}")
        if np.any(np.diff(grid) <= 0):
            raise DistributionError("Grid must be strictly increasing")
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise DistributionError("Probabilities must be finite and nonnegative")
        if abs(probs.sum() - 1.0) > config.NORM_TOLERANCE:
            raise DistributionError(f"Probabilities sum to {probs.sum()!r}, expected 1")
        grid.flags.writeable = False
        probs.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "probs", probs)

    @property
    def n_points(self) -> int:
        return self.grid.size

    @property
    def n_qubits(self) -> int:
        return self.grid.size.bit_length() - 1


def discretize(spec: DistributionSpec) -> DiscretizedDistribution:
    """Discretize ``spec`` onto ``2**spec.n_qubits`` points.

    Normal and Weibull use inclusive endpoints (spacing (hi - lo)/(N - 1)) and
    weights proportional to the pdf, evaluated through the log-pdf so the
    tails do not underflow. Uniform uses left endpoints of N equal cells.
    """
    n_points = spec.n_points
    lo, hi = spec.grid_bounds()

    if isinstance(spec, UniformSpec):
        grid = lo + np.arange(n_points) * (hi - lo) / n_points
        probs = np.full(n_points, 1.0 / n_points)
    elif isinstance(spec, PointSpec):
        grid = np.linspace(lo, hi, n_points)
        probs = np.zeros(n_points)
        probs[0] = 1.0
    else:
        grid = np.linspace(lo, hi, n_points)
        log_weights = spec.frozen_dist().logpdf(grid)
        if not np.any(np.isfinite(log_weights)):
            raise DistributionError(f"pdf of {spec.label} vanishes on the whole grid [{lo}, {hi}]")
        weights = np.exp(log_weights - np.max(log_weights))
        probs = weights / weights.sum()

    logger.debug(f"Discretized {spec.label} on {n_points} points over [{lo:g}, {hi:g}]")
    return DiscretizedDistribution(grid, probs, spec.label)


def check_level(level: float) -> float:
    if not 0.0 < level < 1.0:
        raise ValueError(f"Confidence level must lie in (0, 1), got {level}")
    return float(level)


@dataclass(frozen=True, eq=False)
class ClassicalStats:
    """Exact statistics of a discretized distribution."""

    dd: DiscretizedDistribution
    mean: float
    cdf: np.ndarray

    def var_index(self, level: float) -> int:
        """Smallest grid index ``l`` with ``cdf[l] >= level``."""
        check_level(level)
        index = int(np.searchsorted(self.cdf, level, side="left"))
        return min(index, self.dd.n_points - 1)

    def var(self, level: float) -> float:
        return float(self.dd.grid[self.var_index(level)])

    def achieved_level(self, level: float) -> float:
        return float(self.cdf[self.var_index(level)])

    def tail_mean(self, index: int) -> float:
        """E[X | X <= grid[index]]."""
        tail = self.dd.probs[: index + 1]
        mass = tail.sum()
        if mass <= 0:
            raise DegenerateTailError(f"No probability mass at or below grid index {index}")
        return float(np.dot(tail, self.dd.grid[: index + 1]) / mass)

    def cvar(self, level: float) -> float:
        return self.tail_mean(self.var_index(level))


def classical_stats(dd: DiscretizedDistribution) -> ClassicalStats:
    cdf = np.cumsum(dd.probs)
    cdf.flags.writeable = False
    return ClassicalStats(dd, float(np.dot(dd.probs, dd.grid)), cdf)


@dataclass(frozen=True)
class ContinuousReference:
    var: float
    cvar: float


def continuous_reference(spec: DistributionSpec, level: float) -> ContinuousReference:
    """Quantile and lower-tail mean of the continuous (untruncated) distribution."""
    check_level(level)
    dist = spec.frozen_dist()
    if dist is None:
        return ContinuousReference(spec.value, spec.value)
    q = float(dist.ppf(level))
    cvar = float(dist.expect(lambda t: t, ub=q, conditional=True))
    return ContinuousReference(q, cvar)


def continuous_at_level(spec: DistributionSpec, level: Optional[float]) -> Optional[ContinuousReference]:
    """Continuous reference at an achieved level; ``None`` outside (0, 1)."""
    if level is None or not 0.0 < level < 1.0:
        return None
    return continuous_reference(spec, level)


def continuous_mean(spec: DistributionSpec) -> float:
    dist = spec.frozen_dist()
    return spec.value if dist is None else float(dist.mean())
