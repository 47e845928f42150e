"""Amplitude-estimation problems and the Grover operator.

``Q`` is assembled as the good-state phase flip (Z on the objective qubit),
``A^dagger``, the reflection about ``|0...0>`` (X on every qubit around a
multi-controlled Z) and ``A``, with a global phase of pi. With that phase Q
rotates by ``2 theta_a`` in the plane of good and bad states and has
eigenvalues ``exp(+-2i theta_a)``, which phase estimation relies on.
"""

import logging
import math
import threading
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Optional

import numpy as np

from . import config
from .distributions import DiscretizedDistribution
from .encoding import ObjectiveKind, build_state_preparation
from .exceptions import QubitIndexError
from .qsim import (
    Circuit,
    CircuitMetrics,
    Gate,
    StateVector,
    circuit_unitary,
    count_ones,
    depth_profile,
    probability_of_one,
    renormalize,
    run_circuit,
    ry,
    sample,
    x,
    z,
)

logger = logging.getLogger(__name__)

# Past this many sequential steps the dense path switches to a matrix power
_MAX_DENSE_STEPS = 64


@dataclass(frozen=True, eq=False)
class AmplitudeProblem:
    """State preparation ``A`` whose good amplitude is P(objective qubit = 1)."""

    a_circuit: Circuit
    objective_qubit: int
    label: str = ""
    _states: Dict[int, StateVector] = field(default_factory=dict, init=False, repr=False)
    _lock: threading.RLock = field(default_factory=threading.RLock, init=False, repr=False)

    def __post_init__(self):
        if not 0 <= self.objective_qubit < self.a_circuit.n_qubits:
            raise QubitIndexError(
                f"Objective qubit {self.objective_qubit} outside a "
                f"{self.a_circuit.n_qubits}-qubit circuit"
            )

    @classmethod
    def from_distribution(cls, dd: DiscretizedDistribution, kind: ObjectiveKind) -> "AmplitudeProblem":
        circuit = build_state_preparation(dd, kind)
        return cls(circuit, dd.n_qubits, label=f"{dd.label}:{kind}")

    @property
    def n_total(self) -> int:
        return self.a_circuit.n_qubits

    @cached_property
    def grover_circuit(self) -> Circuit:
        return build_grover(self)

    @cached_property
    def _dense_grover(self) -> Optional[np.ndarray]:
        if self.n_total > config.DENSE_MAX_QUBITS:
            return None
        return circuit_unitary(self.grover_circuit)

    def state_after(self, k: int) -> StateVector:
        """Exact state ``Q^k A |0>``, cached per power."""
        _check_power(k)
        with self._lock:
            if k in self._states:
                return self._states[k]
            if not self._states:
                self._states[0] = run_circuit(self.a_circuit)
            start = max(j for j in self._states if j <= k)
            state = self._states[start]
            steps = k - start
            dense = self._dense_grover
            if dense is not None:
                if steps > _MAX_DENSE_STEPS:
                    amps = np.linalg.matrix_power(dense, steps) @ state.amplitudes
                else:
                    amps = state.amplitudes
                    for _ in range(steps):
                        amps = dense @ amps
                # renormalize accumulated rounding before revalidation
                amps = amps / np.linalg.norm(amps)
                state = StateVector(self.n_total, amps)
            else:
                for _ in range(steps):
                    state = renormalize(run_circuit(self.grover_circuit, state))
            self._states[k] = state
            return state

    def good_probability(self, k: int = 0) -> float:
        return probability_of_one(self.state_after(k), self.objective_qubit)

    def measure_good(self, k: int, shots: int, rng: np.random.Generator) -> int:
        """Sample ``shots`` measurements after ``Q^k A`` and count good outcomes."""
        counts = sample(self.state_after(k), shots, rng)
        hits = count_ones(counts, self.objective_qubit)
        logger.debug(f"k={k}: {hits}/{shots} good outcomes")
        return hits

    @cached_property
    def _profiles(self):
        return depth_profile(self.a_circuit), depth_profile(self.grover_circuit)

    def metrics_for_power(self, k: int) -> CircuitMetrics:
        """Gate count and depth of ``A`` followed by ``k`` copies of ``Q``."""
        _check_power(k)
        prep, grover = self._profiles
        return prep.then(grover.power(k)).metrics()


def _check_power(k: int) -> None:
    if k < 0:
        raise ValueError(f"Grover power must be nonnegative, got {k}")
    if k > config.MAX_GROVER_POWER:
        raise ValueError(f"Grover power {k} exceeds the cap of {config.MAX_GROVER_POWER}")


def true_amplitude(problem: AmplitudeProblem) -> float:
    """Exact good-state probability of ``A |0>``."""
    return problem.good_probability(0)


def build_grover(problem: AmplitudeProblem) -> Circuit:
    a = problem.a_circuit
    n = a.n_qubits
    flips = tuple(x(q) for q in range(n))
    zero_reflection = Gate("Z", n - 1, tuple(range(n - 1)))
    gates = (
        (z(problem.objective_qubit),)
        + a.inverse().gates
        + flips
        + (zero_reflection,)
        + flips
        + a.gates
    )
    # A^dagger and A cancel their global phases; pi turns -Q into Q
    return Circuit(n, gates, math.pi)


def apply_power(problem: AmplitudeProblem, k: int) -> Circuit:
    """``A`` followed by ``k`` copies of ``Q`` as one circuit."""
    _check_power(k)
    return problem.a_circuit.compose(problem.grover_circuit.repeat(k))


def rescale(problem: AmplitudeProblem, factor: float) -> AmplitudeProblem:
    """Problem with good amplitude ``a * factor**2`` on a fresh objective qubit."""
    if not 0.0 < factor <= 1.0:
        raise ValueError(f"Rescale factor must lie in (0, 1], got {factor}")
    n = problem.n_total
    circuit = problem.a_circuit.embed(n + 1)
    circuit = circuit.compose(
        Circuit(n + 1, (ry(2.0 * math.asin(factor), n, controls=(problem.objective_qubit,)),))
    )
    return AmplitudeProblem(circuit, n, label=f"{problem.label}*{factor:g}^2")
