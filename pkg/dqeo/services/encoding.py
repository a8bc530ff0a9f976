"""
Binary discretization of continuous variables and diagonal Hamiltonians

A register holding several variables stores variable 0 in the lowest K_0 bits,
variable 1 in the next K_1 bits, and so on; inside a variable, qubit j carries
weight 2**j. Energies come from evaluating the objective at decoded grid
points; the Pauli-Z expansion exists to cross-check that diagonal for
polynomial objectives.
"""
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union
import logging

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from dqeo.errors import GridError, NotExpandableError, WidthLimitError

logger = logging.getLogger(__name__)

MAX_TABULATED_WIDTH = 12
MAX_SCAN_WIDTH = 24
_SCAN_CHUNK = 1 << 16


class DiscretizationGrid(BaseModel):
    """Uniform grid of 2**k_qubits points with both endpoints on-grid"""
    model_config = ConfigDict(frozen=True)

    x_min: float
    x_max: float
    k_qubits: int = Field(..., ge=1)

    def __init__(self, **data):
        try:
            super().__init__(**data)
        except ValidationError as e:
            raise GridError(f"Invalid grid: {e.errors()[0]['msg']}") from e

    @model_validator(mode="after")
    def check_interval(self):
        if not self.x_min < self.x_max:
            raise ValueError(f"x_min must be < x_max, got [{self.x_min}, {self.x_max}]")
        return self

    @property
    def n_points(self) -> int:
        return 1 << self.k_qubits

    @property
    def delta(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    def decode_many(self, k: np.ndarray) -> np.ndarray:
        k = np.asarray(k)
        x = self.x_min + k * self.delta
        return np.where(k == self.n_points - 1, self.x_max, x)

    def nearest_index(self, x: float) -> int:
        k = int(round((x - self.x_min) / self.delta))
        return min(max(k, 0), self.n_points - 1)


class PauliZTerm(BaseModel):
    """coefficient * prod_{q in z_mask} sigma^z_q; empty mask is the identity"""
    model_config = ConfigDict(frozen=True)

    coefficient: float
    z_mask: int = Field(..., ge=0)


def decode(grid: DiscretizationGrid, k: int) -> float:
    """x_min + k * delta, with decode(2**K - 1) == x_max exactly"""
    if not 0 <= k < grid.n_points:
        raise GridError(f"Index {k} out of range [0, {grid.n_points})")
    return float(grid.decode_many(np.int64(k)))


def number_operator_eigenvalue(z: int) -> int:
    """Map a sigma^z eigenvalue (+1 for |0>, -1 for |1>) to its bit via (1 - z) / 2"""
    if z not in (1, -1):
        raise ValueError(f"sigma^z eigenvalue must be +1 or -1, got {z}")
    return (1 - z) // 2


def z_eigenvalue(bit: int) -> int:
    return 1 - 2 * bit


def bits_of(index: int, width: int) -> Tuple[int, ...]:
    """Bits of a basis index, qubit 0 first"""
    return tuple((index >> q) & 1 for q in range(width))


def index_from_bits(bits: Sequence[int]) -> int:
    return sum(int(b) << q for q, b in enumerate(bits))


def bitstring(index: int, width: int) -> str:
    """Conventional rendering: highest qubit leftmost"""
    return format(index, f"0{width}b")


class DiagonalHamiltonian:
    """Energy of every computational basis state of a (multi-variable) register"""

    def __init__(
        self,
        grids: Sequence[DiscretizationGrid],
        evaluate: Callable[[np.ndarray], np.ndarray],
        pauli_terms: Optional[List[PauliZTerm]] = None,
    ):
        if not grids:
            raise GridError("At least one grid is required")
        self.grids: Tuple[DiscretizationGrid, ...] = tuple(grids)
        self._evaluate = evaluate
        self.pauli_terms = pauli_terms
        self.offsets = tuple(int(o) for o in np.cumsum([0] + [g.k_qubits for g in self.grids[:-1]]))
        self.width = sum(g.k_qubits for g in self.grids)
        self.table: Optional[np.ndarray] = None
        if self.width <= MAX_TABULATED_WIDTH:
            self.table = self._evaluate_indices(np.arange(1 << self.width, dtype=np.int64))

    @property
    def n_vars(self) -> int:
        return len(self.grids)

    def decode_index(self, indices: Union[int, np.ndarray]) -> np.ndarray:
        """Coordinates of basis indices, shape (..., n_vars)"""
        indices = np.asarray(indices, dtype=np.int64)
        columns = []
        for grid, offset in zip(self.grids, self.offsets):
            k = (indices >> offset) & (grid.n_points - 1)
            columns.append(grid.decode_many(k))
        return np.stack(columns, axis=-1)

    def _evaluate_indices(self, indices: np.ndarray) -> np.ndarray:
        return np.asarray(self._evaluate(self.decode_index(indices)), dtype=np.float64)

    def energies(self, indices: np.ndarray) -> np.ndarray:
        indices = np.asarray(indices, dtype=np.int64)
        if self.table is not None:
            return self.table[indices]
        return self._evaluate_indices(indices)

    def energy(self, index: int) -> float:
        if not 0 <= index < (1 << self.width):
            raise GridError(f"Basis index {index} out of range for width {self.width}")
        return float(self.energies(np.array([index]))[0])


def build_diagonal(objective, grids: Sequence[DiscretizationGrid], expand: bool = False) -> DiagonalHamiltonian:
    """
    Diagonal Hamiltonian whose energy at bitstring b is the objective at decode(b)

    Args:
        objective: Objective with objective.dims == len(grids)
        grids: One grid per encoded variable
        expand: Also attach the Pauli-Z expansion (polynomial objectives only)

    Raises:
        GridError: grid count does not match the objective's variable count
        WidthLimitError: total width above 24 qubits
    """
    if len(grids) != objective.dims:
        raise GridError(f"{objective.name} has {objective.dims} variables but {len(grids)} grids were given")
    width = sum(g.k_qubits for g in grids)
    if width > MAX_SCAN_WIDTH:
        raise WidthLimitError(f"Register width {width} exceeds {MAX_SCAN_WIDTH}")
    terms = pauli_expand(objective, grids) if expand else None
    return DiagonalHamiltonian(grids, objective.evaluate, terms)


def _multiply(a: Dict[int, float], b: Dict[int, float]) -> Dict[int, float]:
    # sigma^z squares to the identity, so masks combine by XOR
    out: Dict[int, float] = {}
    for mask_a, coeff_a in a.items():
        for mask_b, coeff_b in b.items():
            mask = mask_a ^ mask_b
            out[mask] = out.get(mask, 0.0) + coeff_a * coeff_b
    return out


def _variable_operator(grid: DiscretizationGrid, offset: int) -> Dict[int, float]:
    """x_min I + delta * sum_j 2^j (I - Z_j) / 2 as a mask -> coefficient map"""
    terms = {0: grid.x_min}
    for j in range(grid.k_qubits):
        weight = grid.delta * (1 << j) / 2.0
        terms[0] += weight
        terms[1 << (offset + j)] = -weight
    return terms


def pauli_expand(objective, grids: Sequence[DiscretizationGrid]) -> List[PauliZTerm]:
    """
    Substitute the variable operators into a polynomial objective and expand

    Raises:
        NotExpandableError: the objective has no polynomial form
        WidthLimitError: total width above 12 qubits
    """
    monomials = objective.polynomial()
    width = sum(g.k_qubits for g in grids)
    if width > MAX_TABULATED_WIDTH:
        raise WidthLimitError(f"Pauli expansion limited to width {MAX_TABULATED_WIDTH}, got {width}")
    if len(grids) != objective.dims:
        raise GridError(f"{objective.name} has {objective.dims} variables but {len(grids)} grids were given")

    offsets = np.cumsum([0] + [g.k_qubits for g in grids[:-1]])
    variables = [_variable_operator(g, int(o)) for g, o in zip(grids, offsets)]

    # powers are reused across monomials
    powers: Dict[Tuple[int, int], Dict[int, float]] = {}

    def power(var: int, exponent: int) -> Dict[int, float]:
        if exponent == 0:
            return {0: 1.0}
        key = (var, exponent)
        if key not in powers:
            powers[key] = _multiply(power(var, exponent - 1), variables[var])
        return powers[key]

    total: Dict[int, float] = {}
    for exponents, coefficient in monomials.items():
        product: Dict[int, float] = {0: float(coefficient)}
        for var, exponent in enumerate(exponents):
            if exponent:
                product = _multiply(product, power(var, exponent))
        for mask, coeff in product.items():
            total[mask] = total.get(mask, 0.0) + coeff

    terms = [PauliZTerm(coefficient=c, z_mask=m) for m, c in sorted(total.items()) if c != 0.0]
    logger.debug(f"Expanded {objective.name} over {width} qubits into {len(terms)} Z terms")
    return terms


def pauli_diagonal(terms: Sequence[PauliZTerm], width: int) -> np.ndarray:
    """sum_terms coeff * prod_{q in mask} z_q(b) for every basis index b"""
    if width > MAX_TABULATED_WIDTH:
        raise WidthLimitError(f"Pauli diagonal limited to width {MAX_TABULATED_WIDTH}, got {width}")
    indices = np.arange(1 << width, dtype=np.int64)
    bits = (indices[:, None] >> np.arange(width)) & 1
    diagonal = np.zeros(1 << width)
    for term in terms:
        mask_bits = (term.z_mask >> np.arange(width)) & 1
        parity = (bits @ mask_bits) & 1
        diagonal += term.coefficient * (1 - 2 * parity)
    return diagonal


def argmin_grid(h: DiagonalHamiltonian) -> Tuple[int, float]:
    """Exhaustive scan for the lowest-energy basis index; ties go to the lowest index"""
    if h.width > MAX_SCAN_WIDTH:
        raise WidthLimitError(f"Exhaustive scan limited to width {MAX_SCAN_WIDTH}, got {h.width}")
    if h.table is not None:
        best = int(np.argmin(h.table))
        return best, float(h.table[best])

    best_index, best_energy = 0, np.inf
    size = 1 << h.width
    for start in range(0, size, _SCAN_CHUNK):
        chunk = np.arange(start, min(start + _SCAN_CHUNK, size), dtype=np.int64)
        energies = h.energies(chunk)
        j = int(np.argmin(energies))
        if energies[j] < best_energy:
            best_index, best_energy = int(chunk[j]), float(energies[j])
    return best_index, best_energy
