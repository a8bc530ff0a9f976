"""
Hardware-efficient ansatz, CVaR objective and one fragment's training loop
"""
from typing import Optional, Tuple
import logging

import numpy as np

from dqeo.errors import ConfigurationError, HistogramMismatchError
from dqeo.models import AnsatzConfig, CVaRConfig, FragmentResult, GradFreeConfig
from dqeo.services import gradfree
from dqeo.services.encoding import DiagonalHamiltonian
from dqeo.services.qsim import ShotHistogram, StateVector, apply_cnot, apply_h, apply_ry, init_zero, sample

logger = logging.getLogger(__name__)


def build_ansatz(cfg: AnsatzConfig, theta) -> StateVector:
    """
    Hadamard on every wire, then `layers` blocks of (Ry on each wire, cyclic CNOT ring)

    Parameter theta[j * n + q] is the Ry angle of wire q in block j.
    """
    theta = np.asarray(theta, dtype=np.float64).ravel()
    if theta.size != cfg.parameter_count:
        raise ValueError(f"Expected {cfg.parameter_count} parameters, got {theta.size}")

    n = cfg.n_qubits
    state = init_zero(n)
    for q in range(n):
        apply_h(state, q)
    for j in range(cfg.layers):
        for q in range(n):
            apply_ry(state, q, float(theta[j * n + q]))
        if n > 1:
            for q in range(n - 1):
                apply_cnot(state, q, q + 1)
            # a 2-wire ring is the pair (0->1, 1->0)
            apply_cnot(state, n - 1, 0)
    return state


def tail_weights(energies: np.ndarray, indices: np.ndarray, counts: np.ndarray, tail_size: int) -> np.ndarray:
    """
    Shots each histogram entry contributes to the lowest tail_size energies

    Entries are ranked by (energy, basis index) so ties at the cutoff are
    resolved toward lower indices.
    """
    order = np.lexsort((indices, energies))
    taken = np.zeros(counts.shape, dtype=np.int64)
    cumulative = np.cumsum(counts[order])
    previous = cumulative - counts[order]
    taken[order] = np.clip(tail_size - previous, 0, counts[order])
    return taken


def _check_histogram(hist: ShotHistogram, cfg: CVaRConfig) -> None:
    if hist.total_shots != cfg.shots:
        raise HistogramMismatchError(f"Histogram holds {hist.total_shots} shots, configuration expects {cfg.shots}")


def cvar_energy(h: DiagonalHamiltonian, hist: ShotHistogram, cfg: CVaRConfig) -> float:
    """Mean of the lowest ceil(alpha * shots) per-shot energies"""
    _check_histogram(hist, cfg)
    energies = h.energies(hist.indices)
    weights = tail_weights(energies, hist.indices, hist.counts, cfg.tail_size)
    return float(np.dot(weights, energies) / cfg.tail_size)


def _tail_statistics(h: DiagonalHamiltonian, hist: ShotHistogram, cfg: CVaRConfig) -> Tuple[np.ndarray, np.ndarray, float]:
    """Frequency-weighted tail centroid, per-variable tail RMS about it, and the CVaR"""
    energies = h.energies(hist.indices)
    weights = tail_weights(energies, hist.indices, hist.counts, cfg.tail_size).astype(np.float64)
    coords = h.decode_index(hist.indices)
    centroid = weights @ coords / cfg.tail_size
    rms = np.sqrt(weights @ (coords - centroid) ** 2 / cfg.tail_size)
    return centroid, rms, float(np.dot(weights, energies) / cfg.tail_size)


def run_fragment(
    h: DiagonalHamiltonian,
    a_cfg: AnsatzConfig,
    c_cfg: CVaRConfig,
    g_cfg: GradFreeConfig,
    rng: np.random.Generator,
    dimension: Optional[int] = None,
) -> FragmentResult:
    """
    Train one register's ansatz on the CVaR of sampled energies

    Each objective evaluation prepares the ansatz, draws c_cfg.shots samples
    from rng and returns their CVaR. The lowest-energy basis state seen in any
    evaluation gives x_best; a fresh histogram at the optimized angles gives
    the tail centroid and RMS.

    Args:
        h: Diagonal Hamiltonian of the register (width == a_cfg.n_qubits)
        rng: Stream owned by this fragment
        dimension: Objective dimension for a separable fragment, None for a joint register
    """
    if h.width != a_cfg.n_qubits:
        raise ConfigurationError(f"Hamiltonian width {h.width} does not match ansatz width {a_cfg.n_qubits}")

    best = {"index": 0, "energy": np.inf}

    def observe(hist: ShotHistogram) -> None:
        energies = h.energies(hist.indices)
        j = int(np.argmin(energies))
        if energies[j] < best["energy"]:
            best["index"] = int(hist.indices[j])
            best["energy"] = float(energies[j])

    def objective(theta: np.ndarray) -> float:
        hist = sample(build_ansatz(a_cfg, theta), c_cfg.shots, rng)
        observe(hist)
        return cvar_energy(h, hist, c_cfg)

    result = gradfree.minimize(objective, np.zeros(a_cfg.parameter_count), g_cfg)

    final_hist = sample(build_ansatz(a_cfg, result.x_opt), c_cfg.shots, rng)
    observe(final_hist)
    centroid, rms, final_cvar = _tail_statistics(h, final_hist, c_cfg)

    logger.debug(
        f"Fragment {dimension if dimension is not None else 'joint'}: {result.evals_used} evals, "
        f"best energy {best['energy']:.6g}, final CVaR {final_cvar:.6g}"
    )

    return FragmentResult(
        dimension=dimension,
        x_best=h.decode_index(best["index"]).tolist(),
        x_cvar=centroid.tolist(),
        rms=rms.tolist(),
        best_index=best["index"],
        best_energy=best["energy"],
        final_cvar=final_cvar,
        final_histogram=final_hist.as_dict(),
        cvar_trace=result.trace,
        evals_used=result.evals_used,
        terminated_by=result.terminated_by,
    )
