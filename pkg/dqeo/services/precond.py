"""
Quantum preconditioning of one trial

Separable objectives get one K-qubit fragment per dimension, run on a thread
pool with a random stream keyed by dimension index. Non-separable objectives
are encoded on one joint register of D*K qubits. Fragment outputs are folded
into a seed point and a clipped trust-region box.
"""
from concurrent.futures import ThreadPoolExecutor
from typing import List, Sequence, Tuple
import logging

import numpy as np

from dqeo.errors import CircuitKnittingRequiredError
from dqeo.models import AnsatzConfig, FragmentResult, PreconditionConfig, SeedBox
from dqeo.services.encoding import DiagonalHamiltonian, DiscretizationGrid, build_diagonal
from dqeo.services.objectives import Objective
from dqeo.services.qsim import MAX_QUBITS
from dqeo.services.vqe import run_fragment
from dqeo.utils.seeding import FRAGMENT_STREAM, rng_stream

logger = logging.getLogger(__name__)


def seed_box(
    x_best: Sequence[float],
    x_cvar: Sequence[float],
    rms: Sequence[float],
    lower: Sequence[float],
    upper: Sequence[float],
    beta: float = 0.7,
    delta_base: float = 0.5,
    gamma: float = 2.0,
) -> SeedBox:
    """
    x_seed = beta * x_best + (1 - beta) * x_cvar and delta = delta_base + gamma * rms,
    box [x_seed - delta, x_seed + delta] clipped to [lower, upper]
    """
    x_best = np.asarray(x_best, dtype=np.float64)
    x_cvar = np.asarray(x_cvar, dtype=np.float64)
    lower = np.asarray(lower, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)

    x_seed = np.clip(beta * x_best + (1.0 - beta) * x_cvar, lower, upper)
    delta = delta_base + gamma * np.asarray(rms, dtype=np.float64)
    lb = np.maximum(x_seed - delta, lower)
    ub = np.minimum(x_seed + delta, upper)

    return SeedBox(
        x_seed=x_seed.tolist(),
        delta=delta.tolist(),
        lb=lb.tolist(),
        ub=ub.tolist(),
        beta=beta,
        delta_base=delta_base,
        gamma=gamma,
    )


def _ansatz(cfg: PreconditionConfig, n_qubits: int) -> AnsatzConfig:
    return AnsatzConfig(n_qubits=n_qubits, layers=cfg.layers)


def precondition(objective: Objective, k_qubits: int, cfg: PreconditionConfig, trial_seed: int) -> Tuple[SeedBox, List[FragmentResult]]:
    """
    Run every fragment of one trial and build its seed box

    Args:
        objective: Landscape to precondition
        k_qubits: Qubits per dimension
        cfg: Ansatz depth, CVaR, COBYLA and seed-box settings
        trial_seed: Seed of the trial; fragment i draws from the stream keyed by i

    Raises:
        CircuitKnittingRequiredError: non-separable objective wider than 20 qubits
    """
    if not objective.separable:
        box, fragment = joint_precondition(objective, k_qubits, cfg, trial_seed)
        return box, [fragment]

    a_cfg = _ansatz(cfg, k_qubits)
    hamiltonians: List[DiagonalHamiltonian] = [
        build_diagonal(
            objective.slice_objective(i),
            [DiscretizationGrid(x_min=float(objective.lower[i]), x_max=float(objective.upper[i]), k_qubits=k_qubits)],
        )
        for i in range(objective.dims)
    ]

    def run(i: int) -> FragmentResult:
        rng = rng_stream(trial_seed, FRAGMENT_STREAM, i)
        return run_fragment(hamiltonians[i], a_cfg, cfg.cvar, cfg.gradfree, rng, dimension=i)

    if cfg.fragment_workers > 1 and objective.dims > 1:
        with ThreadPoolExecutor(max_workers=cfg.fragment_workers) as executor:
            fragments = list(executor.map(run, range(objective.dims)))
    else:
        fragments = [run(i) for i in range(objective.dims)]

    box = seed_box(
        [f.x_best[0] for f in fragments],
        [f.x_cvar[0] for f in fragments],
        [f.rms[0] for f in fragments],
        objective.lower,
        objective.upper,
        cfg.beta,
        cfg.delta_base,
        cfg.gamma,
    )
    logger.debug(f"Seed box for {objective.name} D={objective.dims}: lb={box.lb}, ub={box.ub}")
    return box, fragments


def joint_precondition(objective: Objective, k_qubits: int, cfg: PreconditionConfig, trial_seed: int) -> Tuple[SeedBox, FragmentResult]:
    """One register of dims * k_qubits qubits; seed and box are extracted per decoded variable"""
    width = objective.dims * k_qubits
    if width > MAX_QUBITS:
        raise CircuitKnittingRequiredError(width, MAX_QUBITS)

    grids = [
        DiscretizationGrid(x_min=float(lo), x_max=float(hi), k_qubits=k_qubits)
        for lo, hi in zip(objective.lower, objective.upper)
    ]
    h = build_diagonal(objective, grids)
    fragment = run_fragment(
        h,
        _ansatz(cfg, width),
        cfg.cvar,
        cfg.gradfree,
        rng_stream(trial_seed, FRAGMENT_STREAM, 0),
    )
    box = seed_box(
        fragment.x_best,
        fragment.x_cvar,
        fragment.rms,
        objective.lower,
        objective.upper,
        cfg.beta,
        cfg.delta_base,
        cfg.gamma,
    )
    return box, fragment
