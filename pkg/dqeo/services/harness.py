"""
Benchmark battery driver

A battery expands into configuration cells (mode, objective, D, K, budget),
each cell into repeats x trials independent units. Units run in a process
pool when jobs > 1; results come back in unit order, so reports depend only
on the seeds.
"""
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence
import logging
import math
import time

import numpy as np

from dqeo import __version__
from dqeo.config import BatteryConfig, settings
from dqeo.errors import ConfigurationError, DQEOError, NoSuccessfulCaptureError
from dqeo.logger import log_battery, log_error, log_trial
from dqeo.models import (
    AnsatzConfig,
    BatteryReport,
    BoxSummary,
    CellSummary,
    CVaRConfig,
    DimensionTrap,
    GradFreeConfig,
    GridBasin,
    GridStudy,
    Mode,
    PreconditionConfig,
    PsoConfig,
    ReferenceRow,
    TrialRecord,
    VolumeMetrics,
)
from dqeo.services.encoding import DiscretizationGrid, argmin_grid, bitstring, build_diagonal
from dqeo.services.objectives import Objective, get_objective, himmelblau
from dqeo.services.precond import precondition
from dqeo.services.qsim import MAX_QUBITS
from dqeo.services.refine import refine, refine_box
from dqeo.utils.seeding import REFINE_STREAM, derive_trial_seed, rng_stream

logger = logging.getLogger(__name__)

NO_CAPTURE = "no successful capture"

# battery keys that change how a run is executed or written, never its results
_EXECUTION_KEYS = {"out", "format", "jobs", "fragment_workers"}


@dataclass(frozen=True)
class Cell:
    mode: Mode
    objective: str
    dims: int
    qubits: int
    budget: int

    @property
    def name(self) -> str:
        if self.mode == Mode.CLASSICAL:
            return f"classical:{self.objective}:D{self.dims}"
        return f"hybrid:{self.objective}:D{self.dims}:K{self.qubits}:N{self.budget}"


@dataclass(frozen=True)
class TrialUnit:
    """One picklable unit of work"""
    trial_id: int
    cell: Cell
    repeat: int
    trial: int
    seed: int
    config: BatteryConfig


def validate_battery(config: BatteryConfig) -> Dict[int, Objective]:
    """
    Reject invalid combinations before any trial runs

    Returns:
        The objective instance for every requested D

    Raises:
        ConfigurationError: unknown objective, wrong D, joint register too wide,
            or a budget below the ansatz parameter count + 2
    """
    objectives = {d: get_objective(config.objective, d) for d in config.dims}
    if Mode.HYBRID not in config.modes:
        return objectives

    for d, objective in objectives.items():
        width = config.qubits if objective.separable else d * config.qubits
        if not objective.separable and width > MAX_QUBITS:
            raise ConfigurationError(
                f"{objective.name} D={d} needs a joint register of {width} qubits: "
                "requires circuit knitting (out of scope)"
            )
        parameters = AnsatzConfig(n_qubits=width, layers=config.layers).parameter_count
        for budget in config.budgets:
            if budget < parameters + 2:
                raise ConfigurationError(
                    f"Budget {budget} is below {parameters + 2} (ansatz parameters + 2) for D={d}, K={config.qubits}"
                )
    return objectives


def build_cells(config: BatteryConfig) -> List[Cell]:
    cells = []
    for mode in config.modes:
        for d in config.dims:
            if mode == Mode.HYBRID:
                for budget in config.budgets:
                    cells.append(Cell(mode, config.objective, d, config.qubits, budget))
            else:
                cells.append(Cell(mode, config.objective, d, 0, 0))
    return cells


def build_units(config: BatteryConfig, cells: Sequence[Cell]) -> List[TrialUnit]:
    units = []
    for cell in cells:
        for repeat in range(config.repeats):
            for trial in range(config.trials):
                seed = derive_trial_seed(config.seed, cell.name, trial, repeat)
                units.append(TrialUnit(len(units), cell, repeat, trial, seed, config))
    return units


def _precondition_config(config: BatteryConfig, budget: int) -> PreconditionConfig:
    return PreconditionConfig(
        layers=config.layers,
        cvar=CVaRConfig(shots=config.shots, alpha=config.alpha),
        gradfree=GradFreeConfig(
            max_evals=budget,
            rho_begin=config.rho_begin,
            rho_end=config.rho_end,
            method=config.gradfree_method,
        ),
        beta=config.beta,
        delta_base=config.delta_base,
        gamma=config.gamma,
        fragment_workers=config.fragment_workers,
    )


def _pso_config(config: BatteryConfig, particles: int) -> PsoConfig:
    return PsoConfig(
        particles=particles,
        iterations=config.pso_iterations,
        inertia=settings.pso_inertia,
        cognitive=settings.pso_cognitive,
        social=settings.pso_social,
        velocity_clamp=settings.pso_velocity_clamp,
    )


def run_trial(unit: TrialUnit) -> TrialRecord:
    """Run one hybrid or classical trial; module-level so worker processes can import it"""
    cell, config = unit.cell, unit.config
    objective = get_objective(cell.objective, cell.dims)
    bfgs_options = {"tol": settings.bfgs_tol, "max_iter": settings.bfgs_max_iter, "max_step": settings.bfgs_max_step}
    refine_rng = rng_stream(unit.seed, REFINE_STREAM)
    start = time.perf_counter()

    seedbox = None
    quantum_evals = 0
    if cell.mode == Mode.HYBRID:
        seedbox, fragments = precondition(objective, cell.qubits, _precondition_config(config, cell.budget), unit.seed)
        quantum_evals = sum(f.evals_used for f in fragments)
        result = refine(objective, seedbox, _pso_config(config, config.hybrid_particles), refine_rng, **bfgs_options)
    else:
        result = refine_box(
            objective, objective.lower, objective.upper, _pso_config(config, config.particles), refine_rng, **bfgs_options
        )

    record = TrialRecord(
        trial_id=unit.trial_id,
        cell=cell.name,
        mode=cell.mode,
        objective=cell.objective,
        dims=cell.dims,
        qubits=cell.qubits,
        budget=cell.budget,
        repeat=unit.repeat,
        seed=unit.seed,
        x_final=result.x_final,
        f_final=result.f_final,
        correct=objective.is_correct(result.x_final),
        basin=objective.basin_index(result.x_final),
        bfgs_iterations=result.bfgs_iterations,
        pso_iterations=result.pso_iterations,
        quantum_evals=quantum_evals,
        seedbox=seedbox,
        wall_time=time.perf_counter() - start,
    )
    log_trial(record)
    return record


def box_summary(values: Iterable[float]) -> Optional[BoxSummary]:
    """Median, quartiles, whiskers at the furthest points within 1.5 x IQR, and the outliers beyond"""
    data = np.sort(np.asarray(list(values), dtype=np.float64))
    if data.size == 0:
        return None
    q1, median, q3 = np.percentile(data, [25, 50, 75])
    iqr = q3 - q1
    low_fence, high_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = data[(data >= low_fence) & (data <= high_fence)]
    return BoxSummary(
        count=int(data.size),
        median=float(median),
        q1=float(q1),
        q3=float(q3),
        whisker_low=float(inside.min()),
        whisker_high=float(inside.max()),
        outliers=[float(v) for v in data[(data < low_fence) | (data > high_fence)]],
    )


def volume_metrics(records: Sequence[TrialRecord], objective: Objective, dims: int) -> VolumeMetrics:
    """
    Search-volume and trapped-minima reduction of the widest successful box

    Among correct hybrid trials the widest [lb_i, ub_i] is selected
    independently in every dimension.

    Raises:
        NoSuccessfulCaptureError: no correct hybrid trial carries a seed box
    """
    boxes = [r.seedbox for r in records if r.mode == Mode.HYBRID and r.correct and r.seedbox is not None]
    if not boxes:
        raise NoSuccessfulCaptureError(f"{objective.name} D={dims}: {NO_CAPTURE}")

    lb = np.empty(dims)
    ub = np.empty(dims)
    for i in range(dims):
        widest = max(boxes, key=lambda b: b.ub[i] - b.lb[i])
        lb[i], ub[i] = widest.lb[i], widest.ub[i]

    v_orig = objective.bounds_volume()
    v_pre = float(np.prod(ub - lb))
    lattice = objective.minima_lattice
    per_dimension = [
        DimensionTrap(lb=float(lo), ub=float(hi), minima=lattice.count_in(lo, hi) if lattice else None)
        for lo, hi in zip(lb, ub)
    ]
    return VolumeMetrics(
        v_orig=v_orig,
        v_pre=v_pre,
        reduction=v_orig / v_pre if v_pre > 0 else math.inf,
        minima_orig=objective.minima_count(),
        minima_pre=objective.minima_count(lb, ub),
        correct_trials=len(boxes),
        per_dimension=per_dimension,
    )


def summarize_cell(cell: Cell, records: Sequence[TrialRecord], objective: Objective, config: BatteryConfig) -> CellSummary:
    by_repeat = [sum(1 for r in records if r.repeat == k and r.correct) for k in range(config.repeats)]
    correct = [r for r in records if r.correct]
    basins = Counter(r.basin for r in correct if r.basin is not None)

    volume, volume_error = None, None
    if cell.mode == Mode.HYBRID:
        try:
            volume = volume_metrics(records, objective, cell.dims)
        except NoSuccessfulCaptureError:
            volume_error = NO_CAPTURE

    return CellSummary(
        cell=cell.name,
        mode=cell.mode,
        objective=cell.objective,
        dims=cell.dims,
        qubits=cell.qubits,
        budget=cell.budget,
        trials=len(records),
        repeats=config.repeats,
        n_correct=len(correct),
        n_correct_by_repeat=by_repeat,
        n_correct_box=box_summary(by_repeat),
        bfgs_box=box_summary(r.bfgs_iterations for r in records),
        bfgs_box_correct=box_summary(r.bfgs_iterations for r in correct),
        basin_counts=dict(sorted(basins.items())),
        volume=volume,
        volume_error=volume_error,
    )


class BatteryRunner:
    """Executes one battery and assembles its report"""

    def __init__(self, config: BatteryConfig):
        self.config = config
        self.objectives = validate_battery(config)
        self.cells = build_cells(config)

    def _execute(self, units: List[TrialUnit]) -> List[TrialRecord]:
        if self.config.jobs > 1 and len(units) > 1:
            with ProcessPoolExecutor(max_workers=self.config.jobs) as executor:
                return list(executor.map(run_trial, units))
        return [run_trial(unit) for unit in units]

    def run(self) -> BatteryReport:
        config_dump = self.config.model_dump(mode="json", exclude=_EXECUTION_KEYS)
        units = build_units(self.config, self.cells)
        if not units:
            logger.info("Battery has no trials; returning an empty report")
            return BatteryReport(version=__version__, config=config_dump)

        logger.info(f"Running {len(units)} trials over {len(self.cells)} cells with {self.config.jobs} job(s)")
        start = time.perf_counter()
        try:
            records = self._execute(units)
        except DQEOError as e:
            log_error("run_battery", str(e), {"type": type(e).__name__})
            raise

        summaries = []
        for cell in self.cells:
            cell_records = [r for r in records if r.cell == cell.name]
            summary = summarize_cell(cell, cell_records, self.objectives[cell.dims], self.config)
            log_battery(cell.name, {"n_correct": summary.n_correct, "trials": len(cell_records)})
            logger.info(f"{cell.name}: {summary.n_correct}/{len(cell_records)} correct")
            summaries.append(summary)

        logger.info(f"✅ Battery finished in {time.perf_counter() - start:.1f}s")
        return BatteryReport(version=__version__, config=config_dump, records=records, cells=summaries)


def run_battery(config: BatteryConfig) -> BatteryReport:
    """Validate, run every (cell, repeat, trial) unit and summarize"""
    return BatteryRunner(config).run()


def table_reference(objective_name: str, dims: Sequence[int]) -> List[ReferenceRow]:
    """V_orig and the original lattice-minima count for each D"""
    rows = []
    for d in dims:
        objective = get_objective(objective_name, d)
        rows.append(
            ReferenceRow(
                objective=objective.name,
                dims=d,
                v_orig=objective.bounds_volume(),
                minima_orig=objective.minima_count(),
            )
        )
    return rows


def himmelblau_grid_study(k_qubits: int) -> GridStudy:
    """
    Grid energies of the four Himmelblau minima on a joint 2 x K register over [-50, 50]^2

    Each continuous minimum is snapped to its nearest grid point; the
    exhaustive argmin over all 4**K basis states shows which basin the
    discretization favors.
    """
    objective = himmelblau()
    grids = [DiscretizationGrid(x_min=float(lo), x_max=float(hi), k_qubits=k_qubits) for lo, hi in objective.bounds]
    h = build_diagonal(objective, grids)

    basins = []
    for j, center in enumerate(objective.global_minima):
        point = [grid.decode_many(grid.nearest_index(c)) for grid, c in zip(grids, center)]
        basins.append(
            GridBasin(
                basin=j,
                center=[float(c) for c in center],
                grid_point=[float(p) for p in point],
                grid_energy=objective(point),
            )
        )

    index, energy = argmin_grid(h)
    point = h.decode_index(index)
    logger.info(f"Himmelblau K={k_qubits}: grid argmin {bitstring(index, h.width)} at {point.tolist()} (E={energy:.6g})")
    return GridStudy(
        qubits_per_dim=k_qubits,
        delta=grids[0].delta,
        basins=basins,
        argmin_index=index,
        argmin_bitstring=bitstring(index, h.width),
        argmin_point=point.tolist(),
        argmin_energy=energy,
        argmin_basin=objective.nearest_basin(point),
    )
