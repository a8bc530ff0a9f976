"""
Classical refinement: global-best PSO inside a box, then BFGS polishing
when the objective has a gradient
"""
from typing import NamedTuple, Optional, Sequence
import logging
import math

import numpy as np

from dqeo.errors import EmptyBoxError, GradientUnavailableError
from dqeo.models import PsoConfig, RefineResult, SeedBox
from dqeo.services.objectives import Objective

logger = logging.getLogger(__name__)

ARMIJO_C1 = 1e-4
MAX_HALVINGS = 60
CURVATURE_EPS = 1e-12
MACHINE_EPS = float(np.finfo(np.float64).eps)


class PsoOutcome(NamedTuple):
    x: np.ndarray
    f: float
    iterations: int


class BfgsOutcome(NamedTuple):
    x: np.ndarray
    f: float
    iterations: int
    converged: bool


def _box(lb: Sequence[float], ub: Sequence[float]):
    lb = np.asarray(lb, dtype=np.float64).ravel()
    ub = np.asarray(ub, dtype=np.float64).ravel()
    if lb.shape != ub.shape:
        raise EmptyBoxError(f"Box bounds differ in length: {lb.size} vs {ub.size}")
    if np.any(lb > ub):
        bad = int(np.argmax(lb > ub))
        raise EmptyBoxError(f"Empty box in dimension {bad}: [{lb[bad]}, {ub[bad]}]")
    return lb, ub


def pso(
    objective: Objective,
    lb: Sequence[float],
    ub: Sequence[float],
    cfg: PsoConfig,
    rng: np.random.Generator,
    seed: Optional[Sequence[float]] = None,
) -> PsoOutcome:
    """
    Global-best particle swarm confined to [lb, ub]

    Positions start uniform in the box, velocities uniform within the clamp.
    A seed point, when given, replaces particle 0 (clipped to the box).
    After every velocity update velocities are clipped to
    +-velocity_clamp * width and positions to the box. The whole swarm is
    evaluated in one vectorized call per iteration.

    Raises:
        EmptyBoxError: lb > ub in some dimension
    """
    lb, ub = _box(lb, ub)
    width = ub - lb
    vmax = cfg.velocity_clamp * width
    n, d = cfg.particles, lb.size

    positions = np.clip(lb + rng.random((n, d)) * width, lb, ub)
    velocities = (2.0 * rng.random((n, d)) - 1.0) * vmax
    if seed is not None:
        seed = np.asarray(seed, dtype=np.float64).ravel()
        if seed.shape != lb.shape:
            raise ValueError(f"Seed has {seed.size} coordinates, box has {lb.size}")
        positions[0] = np.clip(seed, lb, ub)
    values = objective.evaluate(positions)

    personal = positions.copy()
    personal_f = values.copy()
    g = int(np.argmin(personal_f))
    global_x = personal[g].copy()
    global_f = float(personal_f[g])

    for _ in range(cfg.iterations):
        r1 = rng.random((n, d))
        r2 = rng.random((n, d))
        velocities = (
            cfg.inertia * velocities
            + cfg.cognitive * r1 * (personal - positions)
            + cfg.social * r2 * (global_x - positions)
        )
        np.clip(velocities, -vmax, vmax, out=velocities)
        positions = np.clip(positions + velocities, lb, ub)
        values = objective.evaluate(positions)

        improved = values < personal_f
        personal[improved] = positions[improved]
        personal_f[improved] = values[improved]
        g = int(np.argmin(personal_f))
        if personal_f[g] < global_f:
            global_f = float(personal_f[g])
            global_x = personal[g].copy()

    return PsoOutcome(global_x, global_f, cfg.iterations)


def bfgs(objective: Objective, x0: Sequence[float], tol: float = 1e-8, max_iter: int = 500, max_step: float = 0.25) -> BfgsOutcome:
    """
    Quasi-Newton descent with the inverse-Hessian BFGS update and backtracking Armijo search

    While the inverse Hessian is the identity (first step or after a reset)
    the trial step is capped at max_step in the infinity norm; afterwards the
    full quasi-Newton step is tried first. Stops when the gradient
    infinity-norm drops below tol or after max_iter accepted steps. A failed
    line search returns the current point; it counts as converged only when
    f no longer changes beyond rounding along the search direction.

    Raises:
        GradientUnavailableError: objective is not differentiable
    """
    if not objective.differentiable:
        raise GradientUnavailableError(f"{objective.name} is not differentiable; BFGS needs a gradient")

    x = np.array(x0, dtype=np.float64).ravel()
    f = objective(x)
    g = np.asarray(objective.gradient(x), dtype=np.float64)
    identity = np.eye(x.size)
    h_inv = identity.copy()
    scaled = False

    iterations = 0
    converged = float(np.max(np.abs(g))) < tol
    while not converged and iterations < max_iter:
        p = -h_inv @ g
        slope = float(g @ p)
        if slope >= 0.0:
            # not a descent direction; restart from steepest descent
            h_inv = identity.copy()
            scaled = False
            p = -g
            slope = float(g @ p)

        step_norm = float(np.max(np.abs(p)))
        if step_norm == 0.0:
            converged = True
            break

        alpha = 1.0
        if not scaled:
            alpha = min(1.0, max_step / step_norm)
        first_alpha = alpha

        accepted = False
        for _ in range(MAX_HALVINGS):
            x_new = x + alpha * p
            f_new = objective(x_new)
            if math.isfinite(f_new) and f_new <= f + ARMIJO_C1 * alpha * slope:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            # converged only if f is flat to rounding along p
            floor = MACHINE_EPS * max(1.0, abs(f))
            converged = abs(first_alpha * slope) <= floor or abs(f_new - f) <= floor
            logger.debug(f"Armijo search failed at iteration {iterations}, |g|={np.max(np.abs(g)):.3e}")
            break

        g_new = np.asarray(objective.gradient(x_new), dtype=np.float64)
        s = x_new - x
        y = g_new - g
        sy = float(y @ s)
        if sy > CURVATURE_EPS:
            rho = 1.0 / sy
            left = identity - rho * np.outer(s, y)
            h_inv = left @ h_inv @ left.T + rho * np.outer(s, s)
            scaled = True

        x, f, g = x_new, f_new, g_new
        iterations += 1
        converged = float(np.max(np.abs(g))) < tol

    return BfgsOutcome(x, float(f), iterations, converged)


def refine_box(
    objective: Objective,
    lb: Sequence[float],
    ub: Sequence[float],
    cfg: PsoConfig,
    rng: np.random.Generator,
    tol: float = 1e-8,
    max_iter: int = 500,
    max_step: float = 0.25,
    seed: Optional[Sequence[float]] = None,
) -> RefineResult:
    """
    PSO inside [lb, ub], with seed as particle 0 when given, then BFGS from the
    swarm best when the objective is differentiable
    """
    swarm = pso(objective, lb, ub, cfg, rng, seed=seed)
    if not objective.differentiable:
        return RefineResult(
            x_final=swarm.x.tolist(),
            f_final=swarm.f,
            pso_f=swarm.f,
            bfgs_iterations=0,
            pso_iterations=swarm.iterations,
            converged=True,
        )

    polished = bfgs(objective, swarm.x, tol=tol, max_iter=max_iter, max_step=max_step)
    x_final, f_final = polished.x, polished.f
    if f_final > swarm.f:
        x_final, f_final = swarm.x, swarm.f
    return RefineResult(
        x_final=x_final.tolist(),
        f_final=f_final,
        pso_f=swarm.f,
        bfgs_iterations=polished.iterations,
        pso_iterations=swarm.iterations,
        converged=polished.converged,
    )


def refine(
    objective: Objective,
    seedbox: SeedBox,
    cfg: PsoConfig,
    rng: np.random.Generator,
    tol: float = 1e-8,
    max_iter: int = 500,
    max_step: float = 0.25,
) -> RefineResult:
    """Warm-started refinement: the swarm starts in the seed box with x_seed as one of its particles"""
    return refine_box(
        objective, seedbox.lb, seedbox.ub, cfg, rng, tol=tol, max_iter=max_iter, max_step=max_step, seed=seedbox.x_seed
    )
