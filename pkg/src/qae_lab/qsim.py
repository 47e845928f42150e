"""Gate-model statevector simulator.

Qubit 0 is the least-significant bit of the basis index, so the basis state
``|q_{n-1} ... q_1 q_0>`` has index ``sum(q_i * 2**i)``.

Multi-controlled gates are applied directly to the amplitude array. For
metrics they are decomposed into the elementary set {H, X, Y, Z, RY, PHASE}
plus single-controlled versions (see :func:`circuit_metrics`).
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from . import config
from .exceptions import CircuitSizeError, InvalidStateError, QubitIndexError

logger = logging.getLogger(__name__)

GATE_KINDS = ("H", "X", "Y", "Z", "RY", "PHASE")
SELF_INVERSE_KINDS = ("H", "X", "Y", "Z")

# Decomposition families: kinds in one family share a multi-control recursion
_FAMILY = {"Z": "phase", "PHASE": "phase", "RY": "phase", "X": "x", "Y": "y", "H": "h"}

Counts = Dict[int, int]


def _base_matrix(kind: str, param: float) -> np.ndarray:
    if kind == "H":
        return np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)
    if kind == "X":
        return np.array([[0, 1], [1, 0]], dtype=np.complex128)
    if kind == "Y":
        return np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
    if kind == "Z":
        return np.array([[1, 0], [0, -1]], dtype=np.complex128)
    if kind == "RY":
        c, s = math.cos(param / 2), math.sin(param / 2)
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    if kind == "PHASE":
        return np.array([[1, 0], [0, np.exp(1j * param)]], dtype=np.complex128)
    raise ValueError(f"Unknown gate kind: {kind}")


@dataclass(frozen=True)
class Gate:
    """A single-target gate with an optional set of (possibly open) controls.

    ``control_values[i]`` is the basis value control ``controls[i]`` must hold
    for the gate to act; ``None`` means all controls are closed (value 1).
    ``param`` is the angle in radians for RY and PHASE.
    """

    kind: str
    target: int
    controls: Tuple[int, ...] = ()
    control_values: Optional[Tuple[int, ...]] = None
    param: float = 0.0

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"Unknown gate kind '{self.kind}'. Supported: {GATE_KINDS}")
        controls = tuple(int(c) for c in self.controls)
        if self.control_values is None:
            values = tuple(1 for _ in controls)
        else:
            values = tuple(int(v) for v in self.control_values)
        if len(values) != len(controls):
            raise ValueError(
                f"Got {len(values)} control values for {len(controls)} controls"
            )
        if any(v not in (0, 1) for v in values):
            raise ValueError(f"Control values must be 0 or 1, got {values}")
        if len(set(controls)) != len(controls) or self.target in controls:
            raise QubitIndexError(
                f"Controls {controls} and target {self.target} must be disjoint"
            )
        if self.target < 0 or any(c < 0 for c in controls):
            raise QubitIndexError(f"Negative qubit index in gate {self.kind}")
        object.__setattr__(self, "target", int(self.target))
        object.__setattr__(self, "controls", controls)
        object.__setattr__(self, "control_values", values)
        object.__setattr__(self, "param", float(self.param))

    @property
    def qubits(self) -> Tuple[int, ...]:
        return (*self.controls, self.target)

    def matrix(self) -> np.ndarray:
        """2x2 unitary acting on the target when the controls match."""
        return _base_matrix(self.kind, self.param)

    def inverse(self) -> "Gate":
        if self.kind in SELF_INVERSE_KINDS:
            return self
        return Gate(self.kind, self.target, self.controls, self.control_values, -self.param)

    def with_control(self, qubit: int, value: int = 1) -> "Gate":
        return Gate(
            self.kind,
            self.target,
            (*self.controls, qubit),
            (*self.control_values, value),
            self.param,
        )

    def remap(self, mapping: Sequence[int]) -> "Gate":
        return Gate(
            self.kind,
            mapping[self.target],
            tuple(mapping[c] for c in self.controls),
            self.control_values,
            self.param,
        )

    def check(self, n_qubits: int) -> None:
        """Raise :class:`QubitIndexError` if the gate does not fit ``n_qubits``."""
        bad = [q for q in self.qubits if q >= n_qubits]
        if bad:
            raise QubitIndexError(
                f"Gate {self.kind} uses qubit(s) {bad} outside a {n_qubits}-qubit register"
            )


# --- Gate helpers ---
def h(q: int) -> Gate:
    return Gate("H", q)


def x(q: int, controls: Sequence[int] = (), control_values: Optional[Sequence[int]] = None) -> Gate:
    return Gate("X", q, tuple(controls), None if control_values is None else tuple(control_values))


def y(q: int) -> Gate:
    return Gate("Y", q)


def z(q: int, controls: Sequence[int] = (), control_values: Optional[Sequence[int]] = None) -> Gate:
    return Gate("Z", q, tuple(controls), None if control_values is None else tuple(control_values))


def ry(
    theta: float,
    q: int,
    controls: Sequence[int] = (),
    control_values: Optional[Sequence[int]] = None,
) -> Gate:
    return Gate("RY", q, tuple(controls), None if control_values is None else tuple(control_values), theta)


def phase(phi: float, q: int, controls: Sequence[int] = ()) -> Gate:
    return Gate("PHASE", q, tuple(controls), None, phi)


def cx(control: int, target: int) -> Gate:
    return Gate("X", target, (control,))


def swap(a: int, b: int) -> Tuple[Gate, Gate, Gate]:
    return cx(a, b), cx(b, a), cx(a, b)


def _check_register_size(n_qubits: int) -> None:
    if n_qubits < 1:
        raise CircuitSizeError(f"A register needs at least one qubit, got {n_qubits}")
    if n_qubits > config.MAX_QUBITS:
        raise CircuitSizeError(
            f"{n_qubits} qubits exceed the simulator limit of {config.MAX_QUBITS}"
        )


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list on ``n_qubits`` wires plus a global phase (radians)."""

    n_qubits: int
    gates: Tuple[Gate, ...] = ()
    global_phase: float = 0.0

    def __post_init__(self):
        _check_register_size(self.n_qubits)
        gates = tuple(self.gates)
        for gate in gates:
            gate.check(self.n_qubits)
        object.__setattr__(self, "gates", gates)

    def __len__(self) -> int:
        return len(self.gates)

    def compose(self, other: "Circuit", qubits: Optional[Sequence[int]] = None) -> "Circuit":
        """Append ``other``; its qubit ``i`` lands on ``qubits[i]`` (identity by default)."""
        if qubits is None:
            if other.n_qubits > self.n_qubits:
                raise CircuitSizeError(
                    f"Cannot append a {other.n_qubits}-qubit circuit to {self.n_qubits} qubits"
                )
            extra = other.gates
        else:
            if len(qubits) != other.n_qubits:
                raise CircuitSizeError(
                    f"Qubit map of length {len(qubits)} for a {other.n_qubits}-qubit circuit"
                )
            extra = tuple(g.remap(qubits) for g in other.gates)
        return Circuit(
            self.n_qubits, self.gates + extra, self.global_phase + other.global_phase
        )

    def embed(self, n_total: int, qubits: Optional[Sequence[int]] = None) -> "Circuit":
        """The same circuit on a larger register."""
        return Circuit(n_total).compose(self, qubits)

    def inverse(self) -> "Circuit":
        return Circuit(
            self.n_qubits,
            tuple(g.inverse() for g in reversed(self.gates)),
            -self.global_phase,
        )

    def controlled(self, control: int) -> "Circuit":
        """Condition every gate on ``control``; the global phase becomes a PHASE gate."""
        used = {q for g in self.gates for q in g.qubits}
        if control in used:
            raise QubitIndexError(f"Control qubit {control} is already used by the circuit")
        if control >= self.n_qubits:
            raise QubitIndexError(
                f"Control qubit {control} outside a {self.n_qubits}-qubit register"
            )
        gates = tuple(g.with_control(control) for g in self.gates)
        if self.global_phase:
            gates = gates + (phase(self.global_phase, control),)
        return Circuit(self.n_qubits, gates)

    def repeat(self, k: int) -> "Circuit":
        if k < 0:
            raise ValueError(f"Repetition count must be nonnegative, got {k}")
        return Circuit(self.n_qubits, self.gates * k, self.global_phase * k)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized complex amplitudes over ``n_qubits`` qubits."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        _check_register_size(self.n_qubits)
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size != 1 << self.n_qubits:
            raise InvalidStateError(
                f"Expected {1 << self.n_qubits} amplitudes for {self.n_qubits} qubits, got {amps.size}"
            )
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > config.NORM_TOLERANCE:
            raise InvalidStateError(f"State is not normalized: sum |amp|^2 = {norm!r}")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        return cls.basis(n_qubits, 0)

    @classmethod
    def basis(cls, n_qubits: int, index: int) -> "StateVector":
        _check_register_size(n_qubits)
        if not 0 <= index < 1 << n_qubits:
            raise QubitIndexError(f"Basis index {index} outside a {n_qubits}-qubit register")
        amps = np.zeros(1 << n_qubits, dtype=np.complex128)
        amps[index] = 1.0
        return cls(n_qubits, amps)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.probabilities)))


@lru_cache(maxsize=512)
def _pair_indices(
    n_qubits: int, target: int, controls: Tuple[int, ...], values: Tuple[int, ...]
) -> Tuple[np.ndarray, np.ndarray]:
    idx = np.arange(1 << n_qubits, dtype=np.int64)
    mask = ((idx >> target) & 1) == 0
    for c, v in zip(controls, values):
        mask &= ((idx >> c) & 1) == v
    i0 = idx[mask]
    i1 = i0 | (1 << target)
    i0.flags.writeable = False
    i1.flags.writeable = False
    return i0, i1


def _apply_inplace(amps: np.ndarray, n_qubits: int, gate: Gate) -> None:
    """Apply ``gate`` along axis 0 of ``amps`` (a vector or a stack of columns)."""
    u = gate.matrix()
    i0, i1 = _pair_indices(n_qubits, gate.target, gate.controls, gate.control_values)
    a0 = amps[i0]
    a1 = amps[i1]
    amps[i0] = u[0, 0] * a0 + u[0, 1] * a1
    amps[i1] = u[1, 0] * a0 + u[1, 1] * a1


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    """Return ``U @ state`` for one gate."""
    gate.check(state.n_qubits)
    amps = state.amplitudes.copy()
    _apply_inplace(amps, state.n_qubits, gate)
    return StateVector(state.n_qubits, amps)


def run_circuit(circuit: Circuit, initial: Optional[StateVector] = None) -> StateVector:
    """Apply all gates of ``circuit`` in order; ``initial`` defaults to ``|0...0>``."""
    if initial is None:
        initial = StateVector.zero(circuit.n_qubits)
    if initial.n_qubits != circuit.n_qubits:
        raise CircuitSizeError(
            f"Circuit has {circuit.n_qubits} qubits but the state has {initial.n_qubits}"
        )
    amps = initial.amplitudes.copy()
    for gate in circuit.gates:
        _apply_inplace(amps, circuit.n_qubits, gate)
    if circuit.global_phase:
        amps *= np.exp(1j * circuit.global_phase)
    return StateVector(circuit.n_qubits, amps)


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense unitary of ``circuit``, column ``j`` being the image of ``|j>``."""
    if circuit.n_qubits > config.DENSE_MAX_QUBITS:
        raise CircuitSizeError(
            f"Dense unitary of {circuit.n_qubits} qubits exceeds the limit of "
            f"{config.DENSE_MAX_QUBITS}"
        )
    mat = np.eye(1 << circuit.n_qubits, dtype=np.complex128)
    for gate in circuit.gates:
        _apply_inplace(mat, circuit.n_qubits, gate)
    if circuit.global_phase:
        mat *= np.exp(1j * circuit.global_phase)
    return mat


def renormalize(state: StateVector) -> StateVector:
    """Divide out the rounding drift of a long chain of circuit applications."""
    amps = state.amplitudes / np.linalg.norm(state.amplitudes)
    return StateVector(state.n_qubits, amps)


def probability_of_one(state: StateVector, qubit: int) -> float:
    """Exact marginal probability of measuring ``qubit`` in ``|1>``."""
    if not 0 <= qubit < state.n_qubits:
        raise QubitIndexError(f"Qubit {qubit} outside a {state.n_qubits}-qubit register")
    idx = np.arange(1 << state.n_qubits)
    ones = ((idx >> qubit) & 1) == 1
    return float(np.sum(state.probabilities[ones]))


def sample(state: StateVector, shots: int, seed: int | np.random.Generator) -> Counts:
    """Measure ``state`` in the computational basis ``shots`` times.

    Sampling uses numpy's PCG64 generator: ``seed`` is either an integer seed
    or an existing ``numpy.random.Generator`` whose stream continues.

    Returns:
        Map from basis index to count, only nonzero counts, keys ascending.
    """
    if shots < 1:
        raise ValueError(f"Number of shots must be at least 1, got {shots}")
    rng = np.random.default_rng(seed)
    probs = state.probabilities
    probs = probs / probs.sum()
    counts = rng.multinomial(shots, probs)
    return {int(i): int(counts[i]) for i in np.flatnonzero(counts)}


def count_ones(counts: Counts, qubit: int) -> int:
    """Number of shots in ``counts`` with ``qubit`` measured as 1."""
    return sum(c for index, c in counts.items() if (index >> qubit) & 1)


def qft(m: int) -> Circuit:
    """Quantum Fourier transform ``|y> -> 2^{-m/2} sum_k exp(2 pi i y k / 2^m) |k>``."""
    if m < 1:
        raise ValueError(f"QFT needs at least one qubit, got {m}")
    gates = []
    for j in reversed(range(m)):
        gates.append(h(j))
        for k in reversed(range(j)):
            gates.append(phase(math.pi / 2 ** (j - k), j, controls=(k,)))
    for i in range(m // 2):
        gates.extend(swap(i, m - 1 - i))
    return Circuit(m, tuple(gates))


def inverse_qft(m: int) -> Circuit:
    """Inverse of :func:`qft`; maps the Fourier state of phase ``y/2^m`` to ``|y>``."""
    return qft(m).inverse()


# --- Metrics ---
@dataclass(frozen=True)
class CircuitMetrics:
    gate_count: int
    depth: int


@dataclass(frozen=True, eq=False)
class DepthProfile:
    """Longest gate chains between the wires of an elementary-gate circuit.

    ``paths[i, j]`` is the length of the longest chain of gates that starts on
    input wire ``i`` and ends on output wire ``j`` (``-inf`` if there is none,
    ``0`` on the diagonal of an empty circuit). Concatenation is the (max, +)
    matrix product, so profiles of repeated blocks compose without expanding
    them.
    """

    paths: np.ndarray
    gate_count: int

    @classmethod
    def identity(cls, n_qubits: int) -> "DepthProfile":
        paths = np.full((n_qubits, n_qubits), -np.inf)
        np.fill_diagonal(paths, 0.0)
        return cls(paths, 0)

    @property
    def depth(self) -> int:
        return int(max(0.0, float(np.max(self.paths))))

    def then(self, other: "DepthProfile") -> "DepthProfile":
        paths = np.max(self.paths[:, :, None] + other.paths[None, :, :], axis=1)
        return DepthProfile(paths, self.gate_count + other.gate_count)

    def power(self, k: int) -> "DepthProfile":
        result = DepthProfile.identity(self.paths.shape[0])
        base = self
        while k > 0:
            if k & 1:
                result = result.then(base)
            base = base.then(base)
            k >>= 1
        return result

    def metrics(self) -> CircuitMetrics:
        return CircuitMetrics(self.gate_count, self.depth)


def _embed(local: np.ndarray, wires: Sequence[int], n_qubits: int) -> np.ndarray:
    paths = np.full((n_qubits, n_qubits), -np.inf)
    np.fill_diagonal(paths, 0.0)
    w = np.asarray(wires)
    paths[np.ix_(w, w)] = local
    return paths


def _single_layer(wires: Iterable[int], n_qubits: int) -> np.ndarray:
    paths = np.full((n_qubits, n_qubits), -np.inf)
    np.fill_diagonal(paths, 0.0)
    for w in wires:
        paths[w, w] = 1.0
    return paths


@lru_cache(maxsize=None)
def _multi_controlled(family: str, n_controls: int) -> Tuple[int, np.ndarray]:
    """Gate count and local path matrix of a closed-control gate.

    Local wires are ``0..c-1`` for the controls and ``c`` for the target. For
    ``c >= 2`` a phase-family gate U expands as controlled-V (last control),
    C^{c-1}X onto the last control, controlled-V^dagger, C^{c-1}X again and
    C^{c-1}V from the remaining controls, with V^2 = U. X, Y and H targets
    are conjugated onto the phase family by H, PHASE and RY respectively.
    """
    c = n_controls
    size = c + 1
    if c <= 1:
        return 1, np.ones((size, size))
    if family in ("x", "y", "h"):
        count, inner = _multi_controlled("x" if family == "y" else "phase", c)
        wrap = _single_layer([c], size)
        profile = DepthProfile(wrap, 1).then(DepthProfile(inner, count)).then(DepthProfile(wrap, 1))
        return profile.gate_count, profile.paths

    toggle_count, toggle = _multi_controlled("x", c - 1)
    rest_count, rest = _multi_controlled("phase", c - 1)
    pair = _embed(np.ones((2, 2)), [c - 1, c], size)
    steps = [
        DepthProfile(pair, 1),
        DepthProfile(_embed(toggle, list(range(c)), size), toggle_count),
        DepthProfile(pair, 1),
        DepthProfile(_embed(toggle, list(range(c)), size), toggle_count),
        DepthProfile(_embed(rest, list(range(c - 1)) + [c], size), rest_count),
    ]
    profile = DepthProfile.identity(size)
    for step in steps:
        profile = profile.then(step)
    return profile.gate_count, profile.paths


def gate_profile(gate: Gate, n_qubits: int) -> DepthProfile:
    """Profile of one gate after decomposition into the elementary set."""
    c = len(gate.controls)
    count, local = _multi_controlled(_FAMILY[gate.kind], c)
    profile = DepthProfile(local, count)
    open_wires = [i for i, v in enumerate(gate.control_values) if v == 0]
    if open_wires:
        flips = DepthProfile(_single_layer(open_wires, c + 1), len(open_wires))
        profile = flips.then(profile).then(flips)
    return DepthProfile(_embed(profile.paths, gate.qubits, n_qubits), profile.gate_count)


def depth_profile(circuit: Circuit) -> DepthProfile:
    profile = DepthProfile.identity(circuit.n_qubits)
    for gate in circuit.gates:
        profile = profile.then(gate_profile(gate, circuit.n_qubits))
    return profile


def circuit_metrics(circuit: Circuit) -> CircuitMetrics:
    """Gate count and ASAP depth over elementary gates.

    Gates with two or more controls are expanded by the recursion documented
    in :func:`_multi_controlled`; each open control adds an X before and
    after the gate.
    """
    return depth_profile(circuit).metrics()
