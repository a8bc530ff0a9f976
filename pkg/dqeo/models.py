from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing import Any, List, Optional, Dict, Tuple
from enum import Enum
import math


class Mode(str, Enum):
    """Trial execution mode"""
    HYBRID = "hybrid"
    CLASSICAL = "classical"


class TerminatedBy(str, Enum):
    """Reason a derivative-free run stopped"""
    BUDGET = "budget"
    RADIUS = "radius"


class GradFreeMethod(str, Enum):
    """Derivative-free optimizer behind gradfree.minimize"""
    COBYLA = "cobyla"
    NELDER_MEAD = "nelder-mead"


class ReportFormat(str, Enum):
    """Report output format"""
    JSON = "json"
    CSV = "csv"


# Quantum stage configuration

class AnsatzConfig(BaseModel):
    """Hardware-efficient ansatz layout for one fragment"""
    model_config = ConfigDict(frozen=True)

    n_qubits: int = Field(..., ge=1, le=20)
    layers: int = Field(default=3, ge=1)

    @property
    def parameter_count(self) -> int:
        return self.n_qubits * self.layers


class CVaRConfig(BaseModel):
    """Shot count and confidence level of the CVaR objective"""
    model_config = ConfigDict(frozen=True)

    shots: int = Field(default=1000, ge=1)
    alpha: float = Field(default=0.1, gt=0.0, le=1.0)

    @property
    def tail_size(self) -> int:
        # rounding guards ceil against products like 0.3 * 10 = 3.0000000000000004
        return max(1, min(self.shots, math.ceil(round(self.alpha * self.shots, 9))))


# final radius for shot-noisy CVaR training; small enough that the budget, not the radius, ends the run
CVAR_RHO_END = 1e-12


class GradFreeConfig(BaseModel):
    """Budget and trust-region radii of the derivative-free optimizer"""
    model_config = ConfigDict(frozen=True)

    max_evals: int = Field(default=200, ge=1)
    rho_begin: float = Field(default=0.5, gt=0.0)
    rho_end: float = Field(default=1e-4, gt=0.0)
    method: GradFreeMethod = GradFreeMethod.COBYLA
    bounds: Optional[List[Tuple[float, float]]] = None

    @model_validator(mode="after")
    def check_radii(self):
        if not self.rho_end < self.rho_begin:
            raise ValueError("rho_end must be smaller than rho_begin")
        return self


class GradFreeResult(BaseModel):
    """Outcome of one budgeted derivative-free minimization"""
    x_opt: List[float]
    f_opt: float
    evals_used: int
    terminated_by: TerminatedBy
    trace: List[float] = Field(default_factory=list, description="Objective value of every evaluation, in order")


class FragmentResult(BaseModel):
    """Phase-2 output of one register (one variable when separable, all variables when joint)"""
    dimension: Optional[int] = Field(None, description="Objective dimension of a separable fragment; None for a joint register")
    x_best: List[float]
    x_cvar: List[float]
    rms: List[float]
    best_index: int
    best_energy: float
    final_cvar: float
    final_histogram: Dict[int, int]
    cvar_trace: List[float]
    evals_used: int
    terminated_by: TerminatedBy

    @field_validator("rms")
    @classmethod
    def non_negative_rms(cls, v):
        if any(r < 0 for r in v):
            raise ValueError("rms must be non-negative")
        return v


class PreconditionConfig(BaseModel):
    """Settings of the quantum preconditioner apart from the objective and K"""
    model_config = ConfigDict(frozen=True)

    layers: int = Field(default=3, ge=1)
    cvar: CVaRConfig = Field(default_factory=CVaRConfig)
    gradfree: GradFreeConfig = Field(default_factory=lambda: GradFreeConfig(rho_end=CVAR_RHO_END))
    beta: float = Field(default=0.7, ge=0.0, le=1.0)
    delta_base: float = Field(default=0.5, gt=0.0)
    gamma: float = Field(default=2.0, ge=0.0)
    fragment_workers: int = Field(default=1, ge=1)


class SeedBox(BaseModel):
    """Seed point and clipped trust-region box handed to the classical refiner"""
    x_seed: List[float]
    delta: List[float]
    lb: List[float]
    ub: List[float]
    beta: float = 0.7
    delta_base: float = 0.5
    gamma: float = 2.0

    @model_validator(mode="after")
    def check_box(self):
        n = len(self.x_seed)
        if not (len(self.delta) == len(self.lb) == len(self.ub) == n):
            raise ValueError("SeedBox vectors must share one length")
        for i in range(n):
            if not self.lb[i] <= self.x_seed[i] <= self.ub[i]:
                raise ValueError(f"x_seed[{i}] lies outside [lb, ub]")
        return self


# Classical stage configuration

class PsoConfig(BaseModel):
    """Global-best particle swarm parameters"""
    model_config = ConfigDict(frozen=True)

    particles: int = Field(default=256, ge=1)
    iterations: int = Field(default=200, ge=0)
    inertia: float = Field(default=0.729, gt=0.0, lt=1.0)
    cognitive: float = Field(default=1.49445, ge=0.0)
    social: float = Field(default=1.49445, ge=0.0)
    velocity_clamp: float = Field(default=0.2, gt=0.0, description="Max speed as a fraction of box width")


class RefineResult(BaseModel):
    """Outcome of PSO (+ BFGS when differentiable) inside one box"""
    x_final: List[float]
    f_final: float
    pso_f: float
    bfgs_iterations: int = 0
    pso_iterations: int
    converged: bool


# Harness records and reports

class BoxSummary(BaseModel):
    """Box-plot five-number summary: median, quartiles, 1.5 x IQR whiskers, outliers"""
    count: int
    median: float
    q1: float
    q3: float
    whisker_low: float
    whisker_high: float
    outliers: List[float] = Field(default_factory=list)


class TrialRecord(BaseModel):
    """One trial of one configuration cell"""
    trial_id: int
    cell: str
    mode: Mode
    objective: str
    dims: int
    qubits: int
    budget: int
    repeat: int = 0
    seed: int
    x_final: List[float]
    f_final: float
    correct: bool
    basin: Optional[int] = None
    bfgs_iterations: int
    pso_iterations: int
    quantum_evals: int = 0
    seedbox: Optional[SeedBox] = None
    wall_time: float = Field(0.0, description="Seconds; excluded from reproducibility comparisons")


class DimensionTrap(BaseModel):
    """Selected widest interval of one dimension and the lattice minima it traps"""
    lb: float
    ub: float
    minima: Optional[int] = None


class VolumeMetrics(BaseModel):
    """Search-volume and trapped-minima reduction of one hybrid cell"""
    v_orig: float
    v_pre: float
    reduction: float
    minima_orig: Optional[int] = None
    minima_pre: Optional[int] = None
    correct_trials: int
    per_dimension: List[DimensionTrap] = Field(default_factory=list)


class CellSummary(BaseModel):
    """Aggregates of one (mode, objective, D, K, budget) cell"""
    cell: str
    mode: Mode
    objective: str
    dims: int
    qubits: int
    budget: int
    trials: int = Field(..., description="Trials over all repeats")
    repeats: int
    n_correct: int = Field(..., description="Correct trials over all repeats, <= trials")
    n_correct_by_repeat: List[int]
    n_correct_box: Optional[BoxSummary] = None
    bfgs_box: Optional[BoxSummary] = None
    bfgs_box_correct: Optional[BoxSummary] = None
    basin_counts: Dict[int, int] = Field(default_factory=dict)
    volume: Optional[VolumeMetrics] = None
    volume_error: Optional[str] = None


class BatteryReport(BaseModel):
    """Full result of run_battery: configuration, every trial, per-cell summaries"""
    version: str
    config: Dict[str, Any] = Field(default_factory=dict)
    records: List[TrialRecord] = Field(default_factory=list)
    cells: List[CellSummary] = Field(default_factory=list)


class GridBasin(BaseModel):
    """Continuous minimum, its nearest grid point and that point's energy"""
    basin: int
    center: List[float]
    grid_point: List[float]
    grid_energy: float


class GridStudy(BaseModel):
    """Degeneracy-breaking study of a joint Himmelblau register"""
    qubits_per_dim: int
    delta: float
    basins: List[GridBasin]
    argmin_index: int
    argmin_bitstring: str
    argmin_point: List[float]
    argmin_energy: float
    argmin_basin: Optional[int] = None


class ReferenceRow(BaseModel):
    """Deterministic search-space columns for one (objective, D)"""
    objective: str
    dims: int
    v_orig: float
    minima_orig: Optional[int] = None
