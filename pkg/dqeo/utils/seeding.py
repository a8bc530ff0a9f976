"""Seed derivation for trials and independent random streams inside a trial"""
import hashlib

import numpy as np

# stream purposes inside one trial
FRAGMENT_STREAM = 0
REFINE_STREAM = 1


def derive_trial_seed(base_seed: int, cell: str, trial: int, repeat: int = 0) -> int:
    """
    base_seed XOR a stable 64-bit hash of (cell, repeat, trial)

    The cell name carries mode, objective, D, K and budget, so every cell draws
    its own seeds; hybrid and classical trials pair up by (D, repeat, trial).
    """
    key = f"{cell}:{repeat}:{trial}".encode("utf-8")
    digest = int.from_bytes(hashlib.sha256(key).digest()[:8], "big")
    return int(base_seed) ^ digest


def rng_stream(seed: int, purpose: int, *keys: int) -> np.random.Generator:
    """Generator for one (trial, purpose, keys) coordinate, e.g. one fragment's dimension index"""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(purpose), *(int(k) for k in keys)]))
