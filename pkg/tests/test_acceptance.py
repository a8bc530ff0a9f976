"""
Long seeded batteries checking the headline behaviour of the optimizer.
Run with: pytest --runslow tests/test_acceptance.py
"""
import numpy as np
import pytest

from dqeo.config import BatteryConfig
from dqeo.models import Mode
from dqeo.services.harness import himmelblau_grid_study, run_battery

pytestmark = pytest.mark.slow

ALL_DIMS = list(range(2, 11))


def battery(**overrides):
    values = dict(qubits=5, budgets=[200], shots=1000, alpha=0.1, particles=10_000, seed=2024, jobs=4)
    values.update(overrides)
    return BatteryConfig(**values)


def cell(report, mode, dims, budget=None):
    return next(
        c for c in report.cells
        if c.mode == mode and c.dims == dims and (budget is None or c.budget == budget)
    )


def test_himmelblau_coarse_grid_concentrates_on_argmin_basin():
    study = himmelblau_grid_study(5)
    report = run_battery(battery(objective="himmelblau", dims=[2], trials=200))
    hits = sum(1 for r in report.records if r.basin == study.argmin_basin)
    assert hits >= 0.95 * 200


def test_himmelblau_fine_grid_reaches_every_basin():
    report = run_battery(battery(objective="himmelblau", dims=[2], qubits=10, trials=200))
    assert set(report.cells[0].basin_counts) == {0, 1, 2, 3}


def test_rastrigin_hybrid_at_both_budgets():
    report = run_battery(battery(objective="rastrigin", dims=[10], budgets=[200, 8000], trials=100))
    assert cell(report, Mode.HYBRID, 10, budget=200).n_correct >= 50
    assert cell(report, Mode.HYBRID, 10, budget=8000).n_correct >= 90


def test_rastrigin_classical_success_decays_with_dimension():
    report = run_battery(battery(objective="rastrigin", dims=ALL_DIMS, trials=100, modes=["classical"]))
    counts = [cell(report, Mode.CLASSICAL, d).n_correct for d in ALL_DIMS]
    assert counts[-1] <= 5
    # strictly falling until the baseline stops finding the minimum at all
    for a, b in zip(counts, counts[1:]):
        assert b < a or a == b == 0


def test_ackley_hybrid_margin_without_gradients():
    report = run_battery(
        battery(objective="ackley", dims=[10], budgets=[8000], trials=100, modes=["hybrid", "classical"])
    )
    hybrid = cell(report, Mode.HYBRID, 10)
    classical = cell(report, Mode.CLASSICAL, 10)
    assert hybrid.n_correct - classical.n_correct >= 30
    assert all(r.bfgs_iterations == 0 for r in report.records)


@pytest.mark.parametrize("dims", [5, 10])
def test_warm_start_needs_fewer_bfgs_iterations(dims):
    report = run_battery(battery(objective="rastrigin", dims=[dims], trials=100, modes=["hybrid", "classical"]))
    warm = [r for r in report.records if r.mode == Mode.HYBRID]
    cold = [r for r in report.records if r.mode == Mode.CLASSICAL]
    warm_correct = [r.bfgs_iterations for r in warm if r.correct]
    cold_correct = [r.bfgs_iterations for r in cold if r.correct]
    assert warm_correct
    if not cold_correct:
        # no correct cold start to compare with; fall back to every paired trial
        cold_correct = [r.bfgs_iterations for r in cold]
    assert np.median(warm_correct) < np.median(cold_correct)


@pytest.mark.parametrize("objective", ["rastrigin", "ackley"])
def test_search_space_reduction_grows_with_dimension(objective):
    report = run_battery(battery(objective=objective, dims=ALL_DIMS, trials=100))
    reductions = [cell(report, Mode.HYBRID, d).volume.reduction for d in ALL_DIMS]
    assert all(a < b for a, b in zip(reductions, reductions[1:]))
    if objective == "rastrigin":
        top = cell(report, Mode.HYBRID, 10).volume
        assert top.minima_pre <= 1000
        assert top.minima_orig == 11 ** 10
