"""Seeded generators for the two simulation designs.

Both draw ``x`` and independent noise ``z`` from N(0, 1) with NumPy's PCG64
generator and mix ``y = (z + s * x) / sqrt(s^2 + 1)``, so ``y`` is N(0, 1) with
Pearson correlation ``s / sqrt(s^2 + 1)`` to ``x``. In the second design ``s``
varies with the observation index.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["gen_sim1", "gen_sim2", "sim2_sigma", "mixing_correlation"]


def _mix(T, sigma, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(T)
    z = rng.standard_normal(T)
    return x, (z + sigma * x) / np.sqrt(sigma * sigma + 1.0)


def gen_sim1(T: int, sigma: float = 1.0, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Constant mixing weight ``sigma``; returns ``(x, y)`` arrays of length ``T``."""
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    return _mix(int(T), float(sigma), seed)


def sim2_sigma(i, m):
    """Mixing weight ``5 * ((i - m) / m)**2`` at 1-based index ``i``."""
    return 5.0 * ((np.asarray(i, dtype=float) - m) / m) ** 2


def gen_sim2(T: int, m: int | None = None, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Time-varying mixing weight; correlation dips to 0 at ``i == m``.

    Indices run ``1..T`` and ``m`` defaults to ``T // 2``.
    """
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    if m is None:
        m = max(1, T // 2)
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    sigma = sim2_sigma(np.arange(1, T + 1), m)
    return _mix(int(T), sigma, seed)


def mixing_correlation(sigma: float) -> float:
    """Population Pearson correlation for mixing weight ``sigma``."""
    return sigma / math.sqrt(sigma * sigma + 1.0)
