"""Canonical amplitude estimation by quantum phase estimation of Q."""

import logging
import math
from collections import Counter
from typing import Optional

import numpy as np

from .. import config
from ..exceptions import CircuitSizeError
from ..grover import AmplitudeProblem
from ..models import EstimationResult
from ..qsim import Circuit, depth_profile, h, inverse_qft, renormalize, run_circuit, sample
from .base import EstimatorConfig, ShotLedger, finalize

logger = logging.getLogger(__name__)

MAX_ANCILLAS = 10


def error_bound(a: float, m: int) -> float:
    """Half-width ``2 pi sqrt(a(1-a))/M + pi^2/M^2`` holding with probability >= 8/pi^2."""
    big_m = 1 << m
    return 2 * math.pi * math.sqrt(max(a * (1 - a), 0.0)) / big_m + math.pi**2 / big_m**2


def canonical_qae(
    problem: AmplitudeProblem, m: int, shots: int, seed: Optional[int]
) -> EstimationResult:
    """Phase estimation with ``m`` ancillas; returns the most frequent ``sin^2(pi y / M)``.

    Problem qubits keep their indices; ancilla ``j`` is qubit ``n_total + j``
    and controls ``Q^(2^j)``, so ``y = index >> n_total`` after the inverse QFT.
    """
    if not 1 <= m <= MAX_ANCILLAS:
        raise ValueError(f"Number of ancillas must lie in [1, {MAX_ANCILLAS}], got {m}")
    n = problem.n_total
    total = n + m
    if total > config.MAX_QUBITS:
        raise CircuitSizeError(
            f"{n} problem qubits plus {m} ancillas exceed the limit of {config.MAX_QUBITS}"
        )
    big_m = 1 << m
    ancillas = list(range(n, total))

    prep = problem.a_circuit.embed(total).compose(Circuit(total, tuple(h(q) for q in ancillas)))
    grover = problem.grover_circuit.embed(total)
    iqft = inverse_qft(m).embed(total, ancillas)

    state = run_circuit(prep)
    profile = depth_profile(prep)
    for j, ancilla in enumerate(ancillas):
        controlled_q = grover.controlled(ancilla)
        for _ in range(1 << j):
            state = renormalize(run_circuit(controlled_q, state))
        profile = profile.then(depth_profile(controlled_q).power(1 << j))
    state = run_circuit(iqft, state)
    profile = profile.then(depth_profile(iqft))

    rng = np.random.default_rng(seed)
    counts = sample(state, shots, rng)
    y_counts = Counter()
    for index, c in counts.items():
        y_counts[index >> n] += c

    # different y can give the same sin^2 value (y and M - y)
    by_value = Counter()
    for y, c in y_counts.items():
        by_value[round(math.sin(math.pi * y / big_m) ** 2, 12)] += c
    best = max(by_value.values())
    a_tilde = min(v for v, c in by_value.items() if c == best)

    ledger = ShotLedger()
    ledger.record(big_m - 1, shots, best)
    half_width = error_bound(a_tilde, m)
    logger.info(f"Canonical QAE (m={m}): a_tilde={a_tilde:.6f} from {len(y_counts)} distinct outcomes")
    result = finalize(
        problem,
        ledger,
        a_tilde,
        (a_tilde - half_width, a_tilde + half_width),
        "canonical",
        seed,
        extras={"m": m, "y_counts": dict(sorted(y_counts.items()))},
    )
    result.max_circuit_depth = profile.depth
    return result


def run_canonical(problem: AmplitudeProblem, config: EstimatorConfig, seed) -> EstimationResult:
    return canonical_qae(problem, config.m, config.shots_per_round, seed)
