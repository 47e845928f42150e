"""Circuits that load a discretized distribution and encode an objective.

The loader prepares ``sum_i sqrt(p_i) |i>`` on n qubits. An objective adds one
qubit (index n) and rotates it so that
``F |i>|0> = sqrt(1 - f(i)) |i>|0> + sqrt(f(i)) |i>|1>``; the probability of
measuring that qubit in ``|1>`` is then ``sum_i p_i f(i)``.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .distributions import DiscretizedDistribution
from .exceptions import DegenerateTailError, DistributionError, ObjectiveError
from .qsim import Circuit, Gate, ry

logger = logging.getLogger(__name__)

MEAN = "mean"
CDF_THRESHOLD = "cdf_threshold"
CVAR = "cvar"
OBJECTIVE_TAGS = (MEAN, CDF_THRESHOLD, CVAR)


@dataclass(frozen=True)
class ObjectiveKind:
    tag: str
    index: Optional[int] = None

    def __post_init__(self):
        if self.tag not in OBJECTIVE_TAGS:
            raise ObjectiveError(f"Unknown objective '{self.tag}'. Supported: {OBJECTIVE_TAGS}")
        if self.tag == MEAN and self.index is not None:
            raise ObjectiveError("The mean objective takes no grid index")
        if self.tag != MEAN and self.index is None:
            raise ObjectiveError(f"The {self.tag} objective needs a grid index")

    @classmethod
    def mean(cls) -> "ObjectiveKind":
        return cls(MEAN)

    @classmethod
    def threshold(cls, index: int) -> "ObjectiveKind":
        return cls(CDF_THRESHOLD, int(index))

    @classmethod
    def cvar(cls, index: int) -> "ObjectiveKind":
        return cls(CVAR, int(index))

    def check(self, n_points: int) -> None:
        if self.index is not None and not 0 <= self.index < n_points:
            raise ObjectiveError(
                f"Grid index {self.index} outside [0, {n_points - 1}] for {self.tag}"
            )

    def __str__(self) -> str:
        return self.tag if self.index is None else f"{self.tag}({self.index})"


def objective_values(kind: ObjectiveKind, n_points: int) -> np.ndarray:
    """f(i) for every grid index, clamped to [0, 1]."""
    kind.check(n_points)
    i = np.arange(n_points, dtype=float)
    if kind.tag == MEAN:
        f = i / (n_points - 1)
    elif kind.tag == CDF_THRESHOLD:
        f = (i <= kind.index).astype(float)
    elif kind.index == 0:
        # x/l at the single included point
        f = (i == 0).astype(float)
    else:
        f = np.where(i <= kind.index, i / kind.index, 0.0)
    return np.clip(f, 0.0, 1.0)


def _control_bits(value: int, n_bits: int) -> tuple:
    return tuple((value >> j) & 1 for j in range(n_bits))


def build_loader(source: Union[DiscretizedDistribution, np.ndarray]) -> Circuit:
    """Conditional-probability RY tree from the most significant qubit down.

    Qubit ``q`` is rotated once per value of the already-prepared higher
    qubits, with those qubits as (open or closed) controls, by the angle that
    splits the prefix mass into its ``bit = 0`` and ``bit = 1`` halves.
    """
    probs = np.asarray(source.probs if isinstance(source, DiscretizedDistribution) else source, dtype=float)
    n_points = probs.size
    if n_points < 2 or n_points & (n_points - 1):
        raise DistributionError(f"Loader needs a power-of-two number of points, got {n_points}")
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-10:
        raise DistributionError(f"Probabilities are not normalized (sum = {probs.sum()!r})")
    n = n_points.bit_length() - 1

    gates = []
    for fixed in range(n):
        q = n - 1 - fixed
        halves = probs.reshape(1 << fixed, 2, 1 << q).sum(axis=2)
        controls = tuple(range(q + 1, n))
        for prefix, (p0, p1) in enumerate(halves):
            theta = 2.0 * math.atan2(math.sqrt(p1), math.sqrt(p0))
            if theta == 0.0:
                continue
            gates.append(ry(theta, q, controls, _control_bits(prefix, fixed)))
    logger.debug(f"Loader for {n} qubits uses {len(gates)} rotations")
    return Circuit(n, tuple(gates))


def build_objective(n: int, kind: ObjectiveKind) -> Circuit:
    """State-indexed controlled RY onto qubit ``n``; acts on ``n + 1`` qubits."""
    if n < 1:
        raise ObjectiveError(f"Objective needs at least one distribution qubit, got {n}")
    f = objective_values(kind, 1 << n)
    controls = tuple(range(n))
    gates = [
        Gate("RY", n, controls, _control_bits(i, n), 2.0 * math.asin(math.sqrt(fi)))
        for i, fi in enumerate(f)
        if fi > 0.0
    ]
    return Circuit(n + 1, tuple(gates))


def build_state_preparation(dd: DiscretizedDistribution, kind: ObjectiveKind) -> Circuit:
    """Loader followed by the objective, on ``n + 1`` qubits."""
    n = dd.n_qubits
    loader = build_loader(dd).embed(n + 1)
    return loader.compose(build_objective(n, kind))


def exact_objective_probability(dd: DiscretizedDistribution, kind: ObjectiveKind) -> float:
    """Classical ``sum_i p_i f(i)``."""
    return float(np.dot(dd.probs, objective_values(kind, dd.n_points)))


def to_value_domain(
    a_hat: float,
    dd: DiscretizedDistribution,
    kind: ObjectiveKind,
    tail_probability: Optional[float] = None,
) -> float:
    """Map an amplitude estimate to value units.

    The cvar form ``x_0 + (x_l - x_0) * a_hat / P`` equals ``x_l * a_hat / P``
    on grids starting at zero and stays exact for grids with an offset.
    """
    if not -1e-12 <= a_hat <= 1.0 + 1e-12:
        raise ValueError(f"Amplitude estimate must lie in [0, 1], got {a_hat}")
    a_hat = min(max(a_hat, 0.0), 1.0)
    grid = dd.grid
    if kind.tag == MEAN:
        return float(grid[0] + (grid[-1] - grid[0]) * a_hat)
    if kind.tag == CDF_THRESHOLD:
        return float(a_hat)
    kind.check(dd.n_points)
    if tail_probability is None or tail_probability <= 0.0:
        raise DegenerateTailError(
            f"Tail probability P[X <= x_{kind.index}] is {tail_probability}; CVaR is undefined"
        )
    return float(grid[0] + (grid[kind.index] - grid[0]) * a_hat / tail_probability)
