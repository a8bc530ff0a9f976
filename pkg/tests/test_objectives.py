import numpy as np
import pytest
from numpy.testing import assert_allclose

from dqeo.errors import ConfigurationError, GradientUnavailableError, NotSeparableError
from dqeo.services.objectives import (
    MinimaLattice,
    PolynomialObjective,
    ackley_separable,
    get_objective,
    himmelblau,
    rastrigin,
)

HIMMELBLAU_MINIMA = [
    (3.0, 2.0),
    (-2.805118, 3.131312),
    (-3.779310, -3.283186),
    (3.584428, -1.848126),
]


def numeric_gradient(objective, x, h=1e-6):
    grad = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        grad[i] = (objective(x + e) - objective(x - e)) / (2 * h)
    return grad


def test_rastrigin_values():
    f = rastrigin(3)
    assert f(np.zeros(3)) == pytest.approx(0.0, abs=1e-12)
    assert f(np.ones(3)) == pytest.approx(3.0)
    assert f.separable and f.differentiable


def test_ackley_is_zero_at_origin_and_not_differentiable():
    f = ackley_separable(4)
    assert f(np.zeros(4)) == pytest.approx(0.0, abs=1e-12)
    assert f(np.full(4, 0.5)) > f(np.zeros(4))
    assert not f.differentiable
    with pytest.raises(GradientUnavailableError):
        f.gradient(np.zeros(4))


def test_evaluate_is_vectorized_over_leading_axes(rng):
    f = rastrigin(2)
    x = rng.uniform(-5, 5, size=(4, 3, 2))
    values = f.evaluate(x)
    assert values.shape == (4, 3)
    assert values[2, 1] == pytest.approx(f(x[2, 1]))


def test_separable_sum_of_slices(rng):
    for f in (rastrigin(5), ackley_separable(5)):
        x = rng.uniform(-3, 3, size=5)
        assert f(x) == pytest.approx(sum(float(f.slice(i, x[i])) for i in range(5)), abs=1e-12)


def test_slice_objective_is_one_dimensional():
    f = rastrigin(3)
    g = f.slice_objective(1)
    assert g.dims == 1
    assert g(np.array([0.5])) == pytest.approx(float(f.slice(1, 0.5)))
    assert_allclose(g.bounds, [[-5.12, 5.12]])


def test_himmelblau_minima(rng):
    f = himmelblau()
    assert_allclose(f.global_minima, HIMMELBLAU_MINIMA, atol=1e-5)
    for center in f.global_minima:
        assert f(center) < 1e-12
    assert_allclose(f.bounds, [[-50.0, 50.0], [-50.0, 50.0]])


def test_himmelblau_polynomial_matches_closed_form(rng):
    f = himmelblau()
    generic = PolynomialObjective(f.polynomial(), [(-50.0, 50.0)] * 2)
    x = rng.uniform(-50, 50, size=(50, 2))
    assert_allclose(generic.evaluate(x), f.evaluate(x), rtol=1e-12, atol=1e-9)


def test_himmelblau_is_not_separable():
    f = himmelblau()
    with pytest.raises(NotSeparableError):
        f.slice(0, 1.0)
    with pytest.raises(NotSeparableError):
        f.slice_objective(0)


@pytest.mark.parametrize("objective", [rastrigin(3), himmelblau()])
def test_gradients_match_finite_differences(objective, rng):
    x = rng.uniform(-2, 2, size=objective.dims)
    assert_allclose(objective.gradient(x), numeric_gradient(objective, x), rtol=1e-5, atol=1e-5)


def test_slice_gradient():
    g = rastrigin(2).slice_objective(0)
    assert_allclose(g.gradient(np.array([0.3])), numeric_gradient(g, np.array([0.3])), rtol=1e-6)


def test_search_space_columns():
    assert rastrigin(2).bounds_volume() == pytest.approx(104.8576)
    assert rastrigin(2).minima_count() == 121
    assert ackley_separable(2).minima_count() == 65 ** 2
    assert himmelblau().minima_count() is None


def test_lattice_counting():
    lattice = MinimaLattice()
    assert lattice.count_in(-0.4, 0.45) == 1
    assert lattice.count_in(0.2, 0.8) == 0
    assert lattice.count_in(-5.12, 5.12) == 11
    assert lattice.count_in(1.0, -1.0) == 0


def test_correctness_classification():
    f = rastrigin(2)
    assert f.is_correct([0.5, -0.5])
    assert not f.is_correct([0.51, 0.0])
    assert f.basin_index([0.1, 0.1]) == 0
    assert f.basin_index([1.0, 0.0]) is None


def test_himmelblau_basins():
    f = himmelblau()
    assert f.basin_index([3.2, 2.3]) == 0
    assert f.basin_index([-3.6, -3.5]) == 2
    assert f.basin_index([0.0, 0.0]) is None
    assert not f.is_correct([0.0, 0.0])
    assert f.nearest_basin([10.0, 10.0]) == 0


def test_registry():
    assert get_objective("Rastrigin", 4).dims == 4
    assert get_objective("ackley", 2).name == "ackley"
    with pytest.raises(ConfigurationError):
        get_objective("sphere", 2)
    with pytest.raises(ConfigurationError):
        get_objective("himmelblau", 3)


def test_polynomial_rejects_mismatched_monomials():
    with pytest.raises(ConfigurationError):
        PolynomialObjective({(1, 0, 2): 1.0}, [(0.0, 1.0)] * 2)


@pytest.mark.parametrize("objective", [rastrigin(4), ackley_separable(4)], ids=["rastrigin", "ackley"])
def test_value_is_invariant_under_sign_flips(objective):
    rng = np.random.default_rng(3)
    lo, hi = objective.bounds[0]
    for _ in range(10):
        x = rng.uniform(lo, hi, size=4)
        signs = rng.choice([-1.0, 1.0], size=4)
        assert objective(signs * x) == pytest.approx(objective(x), rel=1e-12, abs=1e-12)
