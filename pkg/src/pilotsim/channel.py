"""Small-scale Rayleigh fading and channel assembly.

Randomness is drawn from counter-based Philox streams keyed by the master
seed.  Each (trial, purpose) pair owns a disjoint block of the counter
space, so a trial's draws depend only on ``(seed, trial)`` and never on the
order in which trials are evaluated or on how they are split across
workers.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeMismatch

__all__ = [
    "FADING",
    "TRAINING_NOISE",
    "DATA",
    "trial_stream",
    "complex_normal",
    "sample_small_scale",
    "sample_small_scale_trials",
    "assemble_channel",
]

# per-trial stream purposes
FADING = 0
TRAINING_NOISE = 1
DATA = 2

_MASK64 = 2**64 - 1


def trial_stream(seed: int, trial: int, purpose: int = FADING) -> np.random.Generator:
    """Generator for one (seed, trial, purpose) substream."""
    counter = np.array([0, 0, trial & _MASK64, purpose & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=seed & _MASK64, counter=counter))


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """CN(0, 1) samples: independent N(0, 1/2) real and imaginary parts."""
    z = rng.standard_normal(size=(*shape, 2))
    return (z[..., 0] + 1j * z[..., 1]) * np.sqrt(0.5)


def sample_small_scale(dims, stream: np.random.Generator) -> np.ndarray:
    """One i.i.d. CN(0, 1) draw of shape ``(L, L, K, M)``."""
    L1, L2, K, M = dims
    return complex_normal(stream, (L1, L2, K, M))


def sample_small_scale_trials(dims, seed: int, trials) -> np.ndarray:
    """Stack of small-scale draws for the given trial indices."""
    return np.stack([sample_small_scale(dims, trial_stream(seed, t, FADING)) for t in trials])


def assemble_channel(beta, theta) -> np.ndarray:
    """``h[..., l, j, k, :] = sqrt(beta[l, j, k]) * theta[..., l, j, k, :]``."""
    beta = np.asarray(beta, dtype=float)
    theta = np.asarray(theta)
    if theta.ndim < 4 or theta.shape[-4:-1] != beta.shape:
        raise ShapeMismatch(f"beta shape {beta.shape} does not match theta shape {theta.shape}")
    return np.sqrt(beta)[..., None] * theta
