"""Bessel J0/J1 evaluation and the zeros that define the radial disc spectrum.

The frequencies of the radial Dirichlet Laplacian on the unit disc are the
squares of the simple positive zeros of J0.  Zeros are located by a McMahon
asymptotic initial guess refined with Newton's method (J0' = -J1), which
converges quadratically and cannot skip a zero because the guesses land
well inside each zero's basin.
"""

from __future__ import annotations

import numpy as np
from scipy import special

__all__ = ["bessel_j0", "bessel_j1", "eigenvalue", "eigenvalues"]

# Newton stopping criterion on the residual |J0(x)|.
_RESIDUAL_TOL = 1e-14
_MAX_NEWTON = 50


def bessel_j0(x):
    """J0(x) for x >= 0, accurate to ~1 ulp (relative near extrema, absolute near zeros)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("bessel_j0 expects x >= 0")
    return special.j0(x)[()] if x.ndim == 0 else special.j0(x)


def bessel_j1(x):
    """J1(x) for x >= 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("bessel_j1 expects x >= 0")
    return special.j1(x)[()] if x.ndim == 0 else special.j1(x)


def _newton_zeros(n_values: np.ndarray) -> np.ndarray:
    beta = np.pi * (n_values - 0.25)
    # first-order McMahon correction keeps Newton in the asymptotic basin even at n=1
    x = beta + 1.0 / (8.0 * beta)
    for _ in range(_MAX_NEWTON):
        f = special.j0(x)
        if np.all(np.abs(f) < _RESIDUAL_TOL):
            break
        x = x + f / special.j1(x)
    return x


_cache = np.empty(0)


def eigenvalues(count: int) -> np.ndarray:
    """First `count` simple positive zeros of J0, strictly increasing.

    Results are cached module-wide; the returned array is read-only.
    """
    global _cache
    if count < 0:
        raise ValueError("count must be nonnegative")
    if count > _cache.size:
        grown = _newton_zeros(np.arange(1, count + 1, dtype=float))
        grown.setflags(write=False)
        _cache = grown
    return _cache[:count]


def eigenvalue(n: int) -> float:
    """The n-th simple zero of J0 (n >= 1), absolute accuracy ~1e-12."""
    if n < 1:
        raise ValueError("mode index n must be >= 1")
    return float(eigenvalues(n)[n - 1])
