import numpy as np
import pytest
from numpy.testing import assert_allclose

from dqeo.errors import EmptyBoxError, GradientUnavailableError
from dqeo.models import PsoConfig, SeedBox
from dqeo.services.objectives import Objective, ackley_separable, polynomial_objective, rastrigin
from dqeo.services.refine import bfgs, pso, refine, refine_box


class RecordingSphere(Objective):
    """Sphere that remembers every position it was evaluated at"""
    name = "sphere"

    def __init__(self, dims):
        super().__init__(dims, [(-10.0, 10.0)] * dims, separable=False, differentiable=True)
        self.seen = []

    def evaluate(self, x):
        x = np.asarray(x, dtype=np.float64)
        self.seen.append(x.copy())
        return np.sum(x ** 2, axis=-1)

    def gradient(self, x):
        return 2.0 * np.asarray(x, dtype=np.float64)


def shifted_square():
    return polynomial_objective({(2,): 1.0, (1,): -6.0, (0,): 9.0}, [(-10.0, 10.0)])


def test_pso_single_particle_without_iterations_returns_initial_sample():
    objective = RecordingSphere(3)
    lb, ub = np.array([-1.0, 0.0, 2.0]), np.array([1.0, 0.5, 4.0])
    outcome = pso(objective, lb, ub, PsoConfig(particles=1, iterations=0), np.random.default_rng(8))
    expected = lb + np.random.default_rng(8).random((1, 3))[0] * (ub - lb)
    assert_allclose(outcome.x, expected)
    assert outcome.iterations == 0
    assert outcome.f == pytest.approx(float(np.sum(expected ** 2)))


def test_pso_zero_width_box_returns_the_point():
    objective = RecordingSphere(2)
    outcome = pso(objective, [0.3, -0.2], [0.3, -0.2], PsoConfig(particles=5, iterations=3), np.random.default_rng(0))
    assert_allclose(outcome.x, [0.3, -0.2])


def test_pso_rejects_empty_box():
    with pytest.raises(EmptyBoxError):
        pso(RecordingSphere(2), [0.0, 1.0], [1.0, 0.5], PsoConfig(), np.random.default_rng(0))


def test_pso_keeps_particles_inside_box():
    objective = RecordingSphere(3)
    lb, ub = np.array([1.0, -2.0, 0.5]), np.array([3.0, -1.0, 0.6])
    pso(objective, lb, ub, PsoConfig(particles=40, iterations=50), np.random.default_rng(2))
    positions = np.concatenate(objective.seen)
    assert np.all(positions >= lb) and np.all(positions <= ub)


def test_pso_solves_sphere():
    for seed in range(20):
        outcome = pso(RecordingSphere(2), [-1.0, -1.0], [1.0, 1.0], PsoConfig(particles=50, iterations=100), np.random.default_rng(seed))
        assert outcome.f < 1e-3


def test_pso_is_deterministic_per_stream():
    cfg = PsoConfig(particles=30, iterations=20)
    a = pso(rastrigin(3), [-5.12] * 3, [5.12] * 3, cfg, np.random.default_rng(4))
    b = pso(rastrigin(3), [-5.12] * 3, [5.12] * 3, cfg, np.random.default_rng(4))
    assert_allclose(a.x, b.x, atol=0)
    assert a.f == b.f


def test_bfgs_exact_on_quadratic():
    outcome = bfgs(shifted_square(), [0.0])
    assert abs(outcome.x[0] - 3.0) < 1e-8
    assert outcome.iterations <= 3
    assert outcome.converged


def test_bfgs_stays_in_global_basin():
    outcome = bfgs(rastrigin(2), [0.1, -0.1])
    assert_allclose(outcome.x, [0.0, 0.0], atol=1e-6)
    assert outcome.converged


def test_bfgs_stops_in_local_basin():
    outcome = bfgs(rastrigin(2), [1.1, 0.9])
    assert_allclose(outcome.x, [1.0, 1.0], atol=0.05)
    assert np.max(np.abs(outcome.x)) > 0.5


def test_bfgs_objective_never_increases():
    objective = rastrigin(3)
    start = [0.3, -1.2, 2.4]
    values = [bfgs(objective, start, max_iter=k).f for k in range(8)]
    assert all(b <= a for a, b in zip(values, values[1:]))


def test_bfgs_requires_gradient():
    with pytest.raises(GradientUnavailableError):
        bfgs(ackley_separable(2), [0.1, 0.1])


def test_refine_skips_bfgs_for_ackley():
    box = SeedBox(x_seed=[0.0, 0.0], delta=[0.5, 0.5], lb=[-0.5, -0.5], ub=[0.5, 0.5])
    result = refine(ackley_separable(2), box, PsoConfig(particles=64, iterations=50), np.random.default_rng(0))
    assert result.bfgs_iterations == 0
    assert result.f_final == result.pso_f
    assert np.all(np.abs(result.x_final) <= 0.5)


def test_refine_in_narrow_box_reaches_origin():
    box = SeedBox(x_seed=[0.0] * 10, delta=[0.4] * 10, lb=[-0.4] * 10, ub=[0.4] * 10)
    result = refine(rastrigin(10), box, PsoConfig(), np.random.default_rng(1))
    assert_allclose(result.x_final, np.zeros(10), atol=1e-4)
    assert result.f_final <= result.pso_f
    assert result.bfgs_iterations > 0


def test_refine_box_full_domain():
    objective = rastrigin(2)
    result = refine_box(objective, objective.lower, objective.upper, PsoConfig(particles=200, iterations=100), np.random.default_rng(3))
    assert result.f_final <= result.pso_f
    assert result.pso_iterations == 100


def test_pso_seed_is_particle_zero():
    objective = RecordingSphere(2)
    outcome = pso(
        objective, [-1.0, -1.0], [1.0, 1.0], PsoConfig(particles=5, iterations=0), np.random.default_rng(6), seed=[0.25, -0.5]
    )
    assert_allclose(objective.seen[0][0], [0.25, -0.5], atol=0)
    assert outcome.f <= 0.25 ** 2 + 0.5 ** 2


def test_pso_seed_outside_box_is_clipped():
    objective = RecordingSphere(2)
    pso(objective, [-1.0, -1.0], [1.0, 1.0], PsoConfig(particles=3, iterations=0), np.random.default_rng(6), seed=[5.0, 0.0])
    assert_allclose(objective.seen[0][0], [1.0, 0.0], atol=0)


def test_pso_rejects_seed_of_wrong_length():
    with pytest.raises(ValueError):
        pso(RecordingSphere(2), [-1.0, -1.0], [1.0, 1.0], PsoConfig(particles=3), np.random.default_rng(0), seed=[0.0])


def test_refine_starts_the_swarm_at_the_seed():
    box = SeedBox(x_seed=[0.0, 0.0], delta=[0.9, 0.9], lb=[-0.9, -0.9], ub=[0.9, 0.9])
    result = refine(rastrigin(2), box, PsoConfig(particles=3, iterations=0), np.random.default_rng(11))
    assert result.pso_f == 0.0
    assert result.x_final == [0.0, 0.0]
    assert result.bfgs_iterations == 0
    assert result.converged


def test_bfgs_at_rounding_floor_counts_as_converged():
    # f evaluates to exactly 0.0 here while the gradient is still above tol
    outcome = bfgs(rastrigin(2), [3.6e-11, -6.7e-11])
    assert outcome.f == 0.0
    assert outcome.converged


def test_bfgs_zero_gradient_with_zero_tolerance():
    outcome = bfgs(rastrigin(2), [0.0, 0.0], tol=0.0)
    assert outcome.iterations == 0
    assert outcome.converged
    assert_allclose(outcome.x, [0.0, 0.0], atol=0)
