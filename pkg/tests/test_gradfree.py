import numpy as np
import pytest

from dqeo.errors import BudgetTooSmallError, NonFiniteObjectiveError
from dqeo.models import GradFreeConfig, GradFreeMethod, TerminatedBy
from dqeo.services.gradfree import minimize


def shifted_square(x):
    return float((x[0] - 3.0) ** 2)


def sphere(x):
    return float(np.sum(np.asarray(x) ** 2))


def rosenbrock(x):
    return float(100.0 * (x[1] - x[0] ** 2) ** 2 + (1.0 - x[0]) ** 2)


def test_convex_one_dimensional():
    result = minimize(shifted_square, [0.0], GradFreeConfig(max_evals=200))
    assert abs(result.x_opt[0] - 3.0) < 1e-3
    assert result.terminated_by == TerminatedBy.RADIUS
    assert result.evals_used < 200


def test_two_dimensional_sphere():
    result = minimize(sphere, [5.0, 5.0], GradFreeConfig(max_evals=100, rho_begin=1.0))
    assert result.f_opt < 1e-4


def test_budget_below_dim_plus_two_is_rejected():
    with pytest.raises(BudgetTooSmallError):
        minimize(sphere, np.zeros(15), GradFreeConfig(max_evals=10))


def test_budget_law_and_trace():
    cfg = GradFreeConfig(max_evals=30)
    result = minimize(rosenbrock, [-1.2, 1.0], cfg)
    assert result.evals_used <= 30
    assert len(result.trace) == result.evals_used
    assert result.terminated_by == TerminatedBy.BUDGET


def test_result_is_best_observed_point():
    result = minimize(rosenbrock, [-1.2, 1.0], GradFreeConfig(max_evals=60))
    assert result.f_opt == min(result.trace)
    assert result.f_opt == rosenbrock(np.array(result.x_opt))
    best_so_far = np.minimum.accumulate(result.trace)
    assert np.all(np.diff(best_so_far) <= 0)


def test_identical_inputs_give_identical_traces():
    cfg = GradFreeConfig(max_evals=80)
    a = minimize(rosenbrock, [-1.2, 1.0], cfg)
    b = minimize(rosenbrock, [-1.2, 1.0], cfg)
    assert a.trace == b.trace
    assert a.x_opt == b.x_opt


def test_noisy_objective_respects_budget():
    rng = np.random.default_rng(3)

    def noisy(x):
        return sphere(x) + rng.normal(scale=0.01)

    result = minimize(noisy, np.ones(4), GradFreeConfig(max_evals=50))
    assert result.evals_used <= 50
    assert result.f_opt == min(result.trace)


def test_non_finite_value_aborts():
    def broken(x):
        return float("nan") if x[0] > 0.2 else sphere(x)

    with pytest.raises(NonFiniteObjectiveError):
        minimize(broken, [0.0, 0.0], GradFreeConfig(max_evals=50))


def test_nelder_mead_fallback():
    cfg = GradFreeConfig(max_evals=200, method=GradFreeMethod.NELDER_MEAD)
    result = minimize(shifted_square, [0.0], cfg)
    assert abs(result.x_opt[0] - 3.0) < 1e-2
    assert result.evals_used <= 200


def test_radii_must_shrink():
    with pytest.raises(ValueError):
        GradFreeConfig(rho_begin=1e-4, rho_end=1e-3)
