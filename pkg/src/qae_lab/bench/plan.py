"""Experiment plans: which distributions, statistics and estimators to run.

Plans are JSON documents validated by pydantic; see README.md for the schema.
"""

import json
import logging
from pathlib import Path
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .. import config
from ..distributions import DistributionSpec, NormalSpec, UniformSpec, WeibullSpec
from ..estimators import ESTIMATOR_REGISTRY, EstimatorConfig
from ..exceptions import PlanError

logger = logging.getLogger(__name__)

CMC = "cmc"
ESTIMATOR_NAMES = tuple(ESTIMATOR_REGISTRY) + (CMC,)
# Sweepable knobs besides the EstimatorConfig fields
EXTRA_SWEEP_PARAMS = ("n_samples",)
INTEGER_PARAMS = ("shots", "max_iter", "m", "n_samples")
DEFAULT_CMC_SAMPLES = 10_000
DEFAULT_SWEEP_POINTS = 8


class EstimatorEntry(BaseModel):
    """One estimator of a plan, optionally swept over one budget parameter."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    params: EstimatorConfig = Field(default_factory=EstimatorConfig)
    sweep_param: Optional[str] = None
    sweep_values: List[float] = Field(default_factory=list)
    n_samples: int = Field(default=DEFAULT_CMC_SAMPLES, ge=2)

    @field_validator("name")
    @classmethod
    def _known_name(cls, v):
        if v not in ESTIMATOR_NAMES:
            raise ValueError(f"Unknown estimator '{v}'. Available: {list(ESTIMATOR_NAMES)}")
        return v

    @model_validator(mode="after")
    def _check_sweep(self):
        if self.sweep_param is None:
            if self.sweep_values:
                raise ValueError("sweep_values given without sweep_param")
            return self
        if self.sweep_param not in EstimatorConfig.model_fields and self.sweep_param not in EXTRA_SWEEP_PARAMS:
            raise ValueError(f"Cannot sweep over '{self.sweep_param}'")
        values = self.sweep_values
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError(f"sweep_values must be strictly increasing, got {values}")
        return self

    def budgets(self, oracle_range: Optional[Tuple[float, float]] = None) -> List[Tuple[str, float]]:
        """(parameter, value) per budget point; a single default point without a sweep.

        A CMC sweep over ``n_samples`` with no explicit values spans the plan's
        oracle range geometrically.
        """
        if self.sweep_param is None:
            if self.name == CMC:
                return [("n_samples", float(self.n_samples))]
            return [("epsilon", float(self.params.epsilon))]
        values = list(self.sweep_values)
        if not values and self.sweep_param == "n_samples" and oracle_range is not None:
            grid = np.geomspace(oracle_range[0], oracle_range[1], DEFAULT_SWEEP_POINTS)
            values = sorted({float(round(v)) for v in grid})
        if not values:
            raise PlanError(f"Estimator '{self.name}' sweeps '{self.sweep_param}' without values")
        return [(self.sweep_param, float(v)) for v in values]

    def config_for(self, param: str, value: float) -> EstimatorConfig:
        if param not in EstimatorConfig.model_fields:
            return self.params
        cast = int(value) if param in INTEGER_PARAMS else value
        # model_validate re-runs the field constraints that model_copy skips
        return EstimatorConfig.model_validate({**self.params.model_dump(), param: cast})

    def samples_for(self, param: str, value: float) -> int:
        return int(value) if param == "n_samples" else self.n_samples


class ExperimentPlan(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    distributions: List[DistributionSpec] = Field(min_length=1)
    statistics: List[Literal["mean", "var", "cvar"]] = Field(default_factory=lambda: ["mean"], min_length=1)
    level: float = Field(default=config.DEFAULT_LEVEL, gt=0, lt=1)
    estimators: List[EstimatorEntry] = Field(min_length=1)
    repetitions: int = Field(default=config.DEFAULT_REPETITIONS, ge=1)
    oracle_range: Optional[Tuple[float, float]] = None
    alpha: float = Field(default=config.DEFAULT_ALPHA, gt=0, lt=1)
    bounds_epsilons: List[float] = Field(
        default_factory=lambda: [float(e) for e in np.geomspace(1e-4, 1e-1, 13)], min_length=1
    )
    seed: int = Field(default=config.DEFAULT_SEED, ge=0, le=2**64 - 1)
    output_dir: Optional[str] = None
    workers: Optional[int] = Field(default=None, ge=1)

    @field_validator("oracle_range")
    @classmethod
    def _range_increasing(cls, v):
        if v is not None and not 0 < v[0] < v[1]:
            raise ValueError(f"oracle_range must satisfy 0 < lo < hi, got {v}")
        return v

    @field_validator("bounds_epsilons")
    @classmethod
    def _epsilons_valid(cls, v):
        if any(not 0 < e < 0.5 for e in v):
            raise ValueError("bounds_epsilons must lie in (0, 0.5)")
        return v


def load_plan(path: str | Path) -> ExperimentPlan:
    """Read and validate a plan file; any failure becomes :class:`PlanError`."""
    path = Path(path)
    if not path.is_file():
        raise PlanError(f"Plan file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        plan = ExperimentPlan.model_validate(data)
    except (json.JSONDecodeError, ValidationError) as e:
        raise PlanError(f"Invalid plan file {path}: {e}") from e
    logger.info(
        f"Loaded plan {path.name}: {len(plan.distributions)} distributions, "
        f"{len(plan.estimators)} estimators, {plan.repetitions} repetitions"
    )
    return plan


def default_plan() -> ExperimentPlan:
    """Table settings: q = 4, 100 shots, epsilon = 1e-3, alpha = 0.05, 10 repetitions."""
    estimator_config = EstimatorConfig(
        epsilon=config.DEFAULT_EPSILON,
        alpha=config.DEFAULT_ALPHA,
        shots=config.DEFAULT_SHOTS,
        max_iter=config.DEFAULT_MAX_ITER,
    )
    return ExperimentPlan(
        distributions=[
            NormalSpec(mu=0.1, sigma=0.01),
            NormalSpec(mu=0.1, sigma=0.05),
            WeibullSpec(beta=1.8),
            UniformSpec(a=0.0, b=1.0),
        ],
        statistics=["mean", "var", "cvar"],
        estimators=[
            EstimatorEntry(name="iqae", params=estimator_config),
            EstimatorEntry(name="mlae", params=estimator_config),
            EstimatorEntry(name="fae", params=estimator_config.model_copy(update={"shots": None})),
        ],
        repetitions=config.DEFAULT_REPETITIONS,
        oracle_range=(1e2, 2e5),
        alpha=config.DEFAULT_ALPHA,
    )
