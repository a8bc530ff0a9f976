"""
Benchmark landscapes: Rastrigin, separable Ackley, Himmelblau

All evaluators are vectorized over leading axes: x has shape (..., dims) and
the result has shape (...). Out-of-bounds points evaluate to the true value.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
from scipy.optimize import minimize as scipy_minimize

from dqeo.errors import (
    ConfigurationError,
    GradientUnavailableError,
    NotExpandableError,
    NotSeparableError,
)

logger = logging.getLogger(__name__)

BASIN_HALF_WIDTH = 0.5


@dataclass(frozen=True)
class MinimaLattice:
    """Local minima at anchor + k * spacing along every dimension"""
    spacing: float = 1.0
    anchor: float = 0.0

    def count_in(self, lb: float, ub: float) -> int:
        if ub < lb:
            return 0
        first = math.ceil((lb - self.anchor) / self.spacing)
        last = math.floor((ub - self.anchor) / self.spacing)
        return max(0, last - first + 1)


class Objective(ABC):
    """Evaluatable landscape with separability and differentiability metadata"""

    name: str = "objective"

    def __init__(
        self,
        dims: int,
        bounds: Sequence[Tuple[float, float]],
        separable: bool,
        differentiable: bool,
        minima_lattice: Optional[MinimaLattice] = None,
    ):
        if dims < 1:
            raise ConfigurationError(f"dims must be >= 1, got {dims}")
        self.dims = dims
        self.bounds = np.array(bounds, dtype=np.float64).reshape(dims, 2)
        self.separable = separable
        self.differentiable = differentiable
        self.minima_lattice = minima_lattice

    @property
    def lower(self) -> np.ndarray:
        return self.bounds[:, 0]

    @property
    def upper(self) -> np.ndarray:
        return self.bounds[:, 1]

    @abstractmethod
    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """f at x with shape (..., dims)"""

    def __call__(self, x) -> float:
        return float(self.evaluate(np.asarray(x, dtype=np.float64)))

    def slice(self, i: int, x_i: np.ndarray) -> np.ndarray:
        raise NotSeparableError(f"{self.name} is not separable")

    def gradient(self, x: np.ndarray) -> np.ndarray:
        raise GradientUnavailableError(f"{self.name} is not differentiable")

    def polynomial(self) -> Dict[Tuple[int, ...], float]:
        """Monomial exponents -> coefficient"""
        raise NotExpandableError(f"{self.name} is not a polynomial")

    def slice_objective(self, i: int) -> "Objective":
        if not self.separable:
            raise NotSeparableError(f"{self.name} is not separable")
        if not 0 <= i < self.dims:
            raise IndexError(f"Dimension {i} out of range for {self.dims}-D {self.name}")
        return SliceObjective(self, i)

    def bounds_volume(self) -> float:
        return float(np.prod(self.upper - self.lower))

    def minima_count(self, lb: Optional[Sequence[float]] = None, ub: Optional[Sequence[float]] = None) -> Optional[int]:
        """Lattice minima inside [lb, ub] (the full bounds by default); None without a lattice"""
        if self.minima_lattice is None:
            return None
        lb = self.lower if lb is None else lb
        ub = self.upper if ub is None else ub
        total = 1
        for lo, hi in zip(lb, ub):
            total *= self.minima_lattice.count_in(float(lo), float(hi))
        return total

    def is_correct(self, x: Sequence[float]) -> bool:
        """Inside the +-0.5 box about the global minimum at the origin"""
        return bool(np.all(np.abs(np.asarray(x, dtype=np.float64)) <= BASIN_HALF_WIDTH))

    def basin_index(self, x: Sequence[float]) -> Optional[int]:
        return 0 if self.is_correct(x) else None


class SeparableObjective(Objective):
    """f(x) = sum_i slice(x_i)"""

    @abstractmethod
    def _slice(self, x_i: np.ndarray) -> np.ndarray:
        """Identical one-dimensional term shared by every dimension"""

    def slice(self, i: int, x_i: np.ndarray) -> np.ndarray:
        if not 0 <= i < self.dims:
            raise IndexError(f"Dimension {i} out of range for {self.dims}-D {self.name}")
        return self._slice(np.asarray(x_i, dtype=np.float64))

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return np.sum(self._slice(x), axis=-1)


class Rastrigin(SeparableObjective):
    name = "rastrigin"

    def __init__(self, dims: int, a: float = 10.0):
        super().__init__(
            dims,
            [(-5.12, 5.12)] * dims,
            separable=True,
            differentiable=True,
            minima_lattice=MinimaLattice(1.0, 0.0),
        )
        self.a = a

    def _slice(self, x_i):
        return x_i ** 2 - self.a * np.cos(2.0 * np.pi * x_i) + self.a

    def gradient(self, x):
        x = np.asarray(x, dtype=np.float64)
        return 2.0 * x + 2.0 * np.pi * self.a * np.sin(2.0 * np.pi * x)


class SeparableAckley(SeparableObjective):
    """Sum of one-dimensional Ackley terms (no 1/d averaging); kinked at x_i = 0"""
    name = "ackley"

    def __init__(self, dims: int):
        super().__init__(
            dims,
            [(-32.768, 32.768)] * dims,
            separable=True,
            differentiable=False,
            minima_lattice=MinimaLattice(1.0, 0.0),
        )

    def _slice(self, x_i):
        return -20.0 * np.exp(-0.2 * np.abs(x_i)) - np.exp(np.cos(2.0 * np.pi * x_i)) + 20.0 + np.e


class PolynomialObjective(Objective):
    """sum_m c_m prod_i x_i**e_mi over a fixed set of monomials"""
    name = "polynomial"

    def __init__(self, monomials: Dict[Tuple[int, ...], float], bounds: Sequence[Tuple[float, float]]):
        dims = len(bounds)
        for exponents in monomials:
            if len(exponents) != dims or any(e < 0 for e in exponents):
                raise ConfigurationError(f"Monomial {exponents} does not match {dims} variables")
        super().__init__(dims, bounds, separable=False, differentiable=True)
        self._monomials = {tuple(int(e) for e in k): float(v) for k, v in monomials.items()}

    def polynomial(self):
        return dict(self._monomials)

    def evaluate(self, x):
        x = np.asarray(x, dtype=np.float64)
        total = np.zeros(x.shape[:-1])
        for exponents, coefficient in self._monomials.items():
            term = np.full(x.shape[:-1], coefficient)
            for i, e in enumerate(exponents):
                if e:
                    term = term * x[..., i] ** e
            total = total + term
        return total

    def gradient(self, x):
        x = np.asarray(x, dtype=np.float64)
        grad = np.zeros(x.shape)
        for exponents, coefficient in self._monomials.items():
            for j, ej in enumerate(exponents):
                if ej == 0:
                    continue
                term = np.full(x.shape[:-1], coefficient * ej)
                for i, e in enumerate(exponents):
                    power = e - 1 if i == j else e
                    if power:
                        term = term * x[..., i] ** power
                grad[..., j] += term
        return grad


# (x^2 + y - 11)^2 + (x + y^2 - 7)^2 expanded
_HIMMELBLAU_MONOMIALS = {
    (4, 0): 1.0,
    (0, 4): 1.0,
    (2, 1): 2.0,
    (1, 2): 2.0,
    (2, 0): -21.0,
    (0, 2): -13.0,
    (1, 0): -14.0,
    (0, 1): -22.0,
    (0, 0): 170.0,
}

# approximate starting points; the stored centers come from local descent
_HIMMELBLAU_STARTS = ((3.0, 2.0), (-2.8, 3.1), (-3.8, -3.3), (3.6, -1.8))


class Himmelblau(PolynomialObjective):
    """Two-variable landscape with four zero-valued minima, searched on [-50, 50]^2"""
    name = "himmelblau"

    def __init__(self, bound: float = 50.0):
        super().__init__(_HIMMELBLAU_MONOMIALS, [(-bound, bound)] * 2)

    def evaluate(self, x):
        x = np.asarray(x, dtype=np.float64)
        u, v = x[..., 0], x[..., 1]
        return (u ** 2 + v - 11.0) ** 2 + (u + v ** 2 - 7.0) ** 2

    def gradient(self, x):
        x = np.asarray(x, dtype=np.float64)
        u, v = x[..., 0], x[..., 1]
        a = u ** 2 + v - 11.0
        b = u + v ** 2 - 7.0
        return np.stack([4.0 * u * a + 2.0 * b, 2.0 * a + 4.0 * v * b], axis=-1)

    @cached_property
    def global_minima(self) -> np.ndarray:
        """The four basin centers, refined to double precision by BFGS"""
        centers = []
        for start in _HIMMELBLAU_STARTS:
            res = scipy_minimize(
                self.__call__, np.array(start), jac=self.gradient, method="BFGS", options={"gtol": 1e-12}
            )
            centers.append(res.x)
        logger.debug(f"Himmelblau basin centers: {np.round(centers, 6).tolist()}")
        return np.array(centers)

    def _chebyshev_distances(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return np.max(np.abs(self.global_minima - x), axis=1)

    def nearest_basin(self, x) -> int:
        """Index of the closest basin center, however far away"""
        return int(np.argmin(self._chebyshev_distances(x)))

    def basin_index(self, x):
        distances = self._chebyshev_distances(x)
        j = int(np.argmin(distances))
        return j if distances[j] <= BASIN_HALF_WIDTH else None

    def is_correct(self, x):
        return self.basin_index(x) is not None


class SliceObjective(Objective):
    """One-variable view of dimension i of a separable objective"""

    def __init__(self, parent: SeparableObjective, i: int):
        super().__init__(
            1,
            [tuple(parent.bounds[i])],
            separable=True,
            differentiable=parent.differentiable,
            minima_lattice=parent.minima_lattice,
        )
        self.parent = parent
        self.index = i
        self.name = f"{parent.name}[{i}]"

    def evaluate(self, x):
        x = np.asarray(x, dtype=np.float64)
        return self.parent.slice(self.index, x[..., 0])

    def slice(self, i, x_i):
        return self.parent.slice(self.index, x_i)

    def gradient(self, x):
        x = np.asarray(x, dtype=np.float64)
        full = np.zeros(x.shape[:-1] + (self.parent.dims,))
        full[..., self.index] = x[..., 0]
        return self.parent.gradient(full)[..., self.index : self.index + 1]


def rastrigin(dims: int) -> Rastrigin:
    return Rastrigin(dims)


def ackley_separable(dims: int) -> SeparableAckley:
    return SeparableAckley(dims)


def himmelblau() -> Himmelblau:
    return Himmelblau()


def polynomial_objective(monomials: Dict[Tuple[int, ...], float], bounds: Sequence[Tuple[float, float]]) -> PolynomialObjective:
    return PolynomialObjective(monomials, bounds)


def _himmelblau_factory(dims: int) -> Himmelblau:
    if dims != 2:
        raise ConfigurationError(f"himmelblau is two-dimensional, got dims={dims}")
    return himmelblau()


OBJECTIVES: Dict[str, Callable[[int], Objective]] = {
    "rastrigin": rastrigin,
    "ackley": ackley_separable,
    "himmelblau": _himmelblau_factory,
}


def get_objective(name: str, dims: int) -> Objective:
    """Objective by CLI name"""
    factory = OBJECTIVES.get(name.strip().lower())
    if factory is None:
        raise ConfigurationError(f"Unknown objective '{name}'; choose from {sorted(OBJECTIVES)}")
    return factory(dims)
