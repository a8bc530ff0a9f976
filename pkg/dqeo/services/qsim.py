"""
Dense state-vector simulator for the fragment ansatz

Qubit q is bit q of the basis index (qubit 0 is the least-significant bit).
Gates act in place with stride arithmetic over the amplitude array and return
the same StateVector instance.
"""
from dataclasses import dataclass
from typing import Dict, Mapping
import logging
import math

import numpy as np

from dqeo.errors import GateError, NormalizationError, QubitRangeError

logger = logging.getLogger(__name__)

MAX_QUBITS = 20
SAMPLING_NORM_TOLERANCE = 1e-6

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_HADAMARD = np.array([[_INV_SQRT2, _INV_SQRT2], [_INV_SQRT2, -_INV_SQRT2]])


class StateVector:
    """Register of n_qubits with 2**n_qubits complex amplitudes"""

    __slots__ = ("n_qubits", "amplitudes")

    def __init__(self, n_qubits: int, amplitudes: np.ndarray):
        _check_width(n_qubits)
        amplitudes = np.ascontiguousarray(amplitudes, dtype=np.complex128)
        if amplitudes.shape != (1 << n_qubits,):
            raise QubitRangeError(
                f"Expected {1 << n_qubits} amplitudes for {n_qubits} qubits, got shape {amplitudes.shape}"
            )
        self.n_qubits = n_qubits
        self.amplitudes = amplitudes

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm_deviation(self) -> float:
        return abs(float(np.vdot(self.amplitudes, self.amplitudes).real) - 1.0)


@dataclass(frozen=True)
class ShotHistogram:
    """Computational-basis counts; indices sorted ascending, counts aligned"""

    n_qubits: int
    indices: np.ndarray
    counts: np.ndarray

    @property
    def total_shots(self) -> int:
        return int(self.counts.sum())

    def as_dict(self) -> Dict[int, int]:
        return {int(i): int(c) for i, c in zip(self.indices, self.counts)}

    @classmethod
    def from_dict(cls, n_qubits: int, counts: Mapping[int, int]) -> "ShotHistogram":
        _check_width(n_qubits)
        size = 1 << n_qubits
        items = sorted((int(k), int(v)) for k, v in counts.items() if int(v) > 0)
        for k, v in items:
            if not 0 <= k < size:
                raise QubitRangeError(f"Basis index {k} out of range for {n_qubits} qubits")
        indices = np.array([k for k, _ in items], dtype=np.int64)
        values = np.array([v for _, v in items], dtype=np.int64)
        return cls(n_qubits, indices, values)


def _check_width(n_qubits: int) -> None:
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise QubitRangeError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")


def _check_qubit(state: StateVector, qubit: int) -> None:
    if not 0 <= qubit < state.n_qubits:
        raise GateError(f"Qubit index {qubit} out of range for {state.n_qubits}-qubit register")


def init_zero(n_qubits: int) -> StateVector:
    """|0...0> on n_qubits wires"""
    _check_width(n_qubits)
    amplitudes = np.zeros(1 << n_qubits, dtype=np.complex128)
    amplitudes[0] = 1.0
    return StateVector(n_qubits, amplitudes)


def _apply_single(state: StateVector, target: int, matrix: np.ndarray) -> StateVector:
    # axis 1 of the view is the target bit: index = hi * 2^(t+1) + bit * 2^t + lo
    psi = state.amplitudes.reshape(-1, 2, 1 << target)
    a0 = psi[:, 0, :].copy()
    a1 = psi[:, 1, :].copy()
    psi[:, 0, :] = matrix[0, 0] * a0 + matrix[0, 1] * a1
    psi[:, 1, :] = matrix[1, 0] * a0 + matrix[1, 1] * a1
    return state


def apply_h(state: StateVector, target: int) -> StateVector:
    _check_qubit(state, target)
    return _apply_single(state, target, _HADAMARD)


def apply_ry(state: StateVector, target: int, theta: float) -> StateVector:
    """Ry(theta) = [[cos(theta/2), -sin(theta/2)], [sin(theta/2), cos(theta/2)]]"""
    _check_qubit(state, target)
    if not math.isfinite(theta):
        raise GateError(f"Ry angle must be finite, got {theta}")
    c = math.cos(theta / 2.0)
    s = math.sin(theta / 2.0)
    return _apply_single(state, target, np.array([[c, -s], [s, c]]))


def apply_cnot(state: StateVector, control: int, target: int) -> StateVector:
    _check_qubit(state, control)
    _check_qubit(state, target)
    if control == target:
        raise GateError(f"CNOT control and target must differ, both are {control}")

    n = state.n_qubits
    psi = state.amplitudes.reshape((2,) * n)
    # C-order reshape puts qubit q on axis n - 1 - q
    flipped_off = [slice(None)] * n
    flipped_off[n - 1 - control] = 1
    flipped_off[n - 1 - target] = 0
    flipped_on = list(flipped_off)
    flipped_on[n - 1 - target] = 1

    off = tuple(flipped_off)
    on = tuple(flipped_on)
    tmp = psi[off].copy()
    psi[off] = psi[on]
    psi[on] = tmp
    return state


def sample(state: StateVector, shots: int, rng: np.random.Generator) -> ShotHistogram:
    """
    Draw shots from the squared-amplitude distribution by inverse CDF

    Args:
        state: Normalized register state
        shots: Number of projective measurements (>= 1)
        rng: Caller-owned random stream; the histogram is a pure function of its state

    Raises:
        ValueError: shots < 1
        NormalizationError: norm deviates from 1 by more than 1e-6
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    deviation = state.norm_deviation()
    if deviation > SAMPLING_NORM_TOLERANCE:
        raise NormalizationError(f"State norm deviates from 1 by {deviation:.3e}")

    cdf = np.cumsum(state.probabilities())
    cdf /= cdf[-1]
    draws = np.searchsorted(cdf, rng.random(shots), side="right")
    np.minimum(draws, cdf.size - 1, out=draws)
    indices, counts = np.unique(draws, return_counts=True)
    return ShotHistogram(state.n_qubits, indices.astype(np.int64), counts.astype(np.int64))
