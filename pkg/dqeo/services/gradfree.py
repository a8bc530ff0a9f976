"""
Budgeted derivative-free minimization

COBYLA (scipy) drives the variational parameters; Nelder-Mead is available
behind the same interface. Every call of f counts against max_evals, the
trace keeps every observed value and the result is the best point observed.
"""
from typing import Callable, List, Optional
import logging
import math

import numpy as np
from scipy.optimize import Bounds
from scipy.optimize import minimize as scipy_minimize

from dqeo.errors import BudgetTooSmallError, NonFiniteObjectiveError
from dqeo.models import GradFreeConfig, GradFreeMethod, GradFreeResult, TerminatedBy

logger = logging.getLogger(__name__)


class _BudgetExhausted(Exception):
    """Raised inside the tracked objective once max_evals calls were made"""


class _TrackedObjective:
    """Counts evaluations, records the trace and keeps the best observed point"""

    def __init__(self, f: Callable[[np.ndarray], float], max_evals: int):
        self.f = f
        self.max_evals = max_evals
        self.evals = 0
        self.trace: List[float] = []
        self.best_x: Optional[np.ndarray] = None
        self.best_f = math.inf

    def __call__(self, x: np.ndarray) -> float:
        if self.evals >= self.max_evals:
            raise _BudgetExhausted()
        x = np.array(x, dtype=np.float64)
        value = float(self.f(x))
        self.evals += 1
        if not math.isfinite(value):
            raise NonFiniteObjectiveError(f"Objective returned {value} at evaluation {self.evals}")
        self.trace.append(value)
        if value < self.best_f:
            self.best_f = value
            self.best_x = x
        return value


def _scipy_bounds(cfg: GradFreeConfig, dim: int) -> Optional[Bounds]:
    if cfg.bounds is None:
        return None
    if len(cfg.bounds) != dim:
        raise ValueError(f"Expected {dim} bounds, got {len(cfg.bounds)}")
    lower, upper = zip(*cfg.bounds)
    return Bounds(np.array(lower, dtype=np.float64), np.array(upper, dtype=np.float64))


def minimize(f: Callable[[np.ndarray], float], x0, cfg: GradFreeConfig) -> GradFreeResult:
    """
    Minimize f from x0 with at most cfg.max_evals evaluations

    Stops at trust-region convergence (rho_end) or budget exhaustion,
    whichever comes first.

    Raises:
        BudgetTooSmallError: max_evals < dim + 2
        NonFiniteObjectiveError: f returned NaN or infinity
    """
    x0 = np.array(x0, dtype=np.float64).ravel()
    dim = x0.size
    if not np.all(np.isfinite(x0)):
        raise ValueError("x0 must be finite")
    if cfg.max_evals < dim + 2:
        raise BudgetTooSmallError(f"Budget {cfg.max_evals} is below dim + 2 = {dim + 2}")

    tracked = _TrackedObjective(f, cfg.max_evals)
    bounds = _scipy_bounds(cfg, dim)

    try:
        if cfg.method == GradFreeMethod.COBYLA:
            scipy_minimize(
                tracked,
                x0,
                method="COBYLA",
                bounds=bounds,
                tol=cfg.rho_end,
                options={"rhobeg": cfg.rho_begin, "maxiter": cfg.max_evals},
            )
        else:
            simplex = np.vstack([x0, x0 + cfg.rho_begin * np.eye(dim)])
            scipy_minimize(
                tracked,
                x0,
                method="Nelder-Mead",
                bounds=bounds,
                options={
                    "maxfev": cfg.max_evals,
                    "initial_simplex": simplex,
                    "xatol": cfg.rho_end,
                    "fatol": cfg.rho_end,
                },
            )
    except _BudgetExhausted:
        pass

    if tracked.best_x is None:
        # nothing was evaluated; report the start point
        tracked(x0)

    terminated_by = TerminatedBy.BUDGET if tracked.evals >= cfg.max_evals else TerminatedBy.RADIUS
    logger.debug(
        f"{cfg.method.value} stopped by {terminated_by.value} after {tracked.evals} evals, f={tracked.best_f:.6g}"
    )

    return GradFreeResult(
        x_opt=tracked.best_x.tolist(),
        f_opt=tracked.best_f,
        evals_used=tracked.evals,
        terminated_by=terminated_by,
        trace=tracked.trace,
    )
