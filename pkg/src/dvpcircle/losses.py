"""Loss functions between a target density and an estimate on a shared grid.

The Kullback-Leibler loss returns +inf whenever the estimate vanishes
somewhere the target does not: clamping would hide exactly the
underestimation behavior the comparison is designed to expose.
"""

from __future__ import annotations

import math

import numpy as np

from dvpcircle.circle import AngularGrid, integrate


def _aligned_values(f0, f) -> tuple[np.ndarray, np.ndarray, AngularGrid]:
    g0 = getattr(f0, "grid", None)
    g1 = getattr(f, "grid", None)
    grid = g0 if g0 is not None else g1
    if grid is None:
        raise ValueError("at least one argument must carry its grid")
    if g0 is not None and g1 is not None and g0 != g1:
        raise ValueError("densities live on different grids")
    v0 = np.asarray(getattr(f0, "values", f0), dtype=float)
    v1 = np.asarray(getattr(f, "values", f), dtype=float)
    if v0.shape != (grid.size,) or v1.shape != (grid.size,):
        raise ValueError("density values are not aligned with the grid")
    return v0, v1, grid


def kl_loss(f0, f) -> float:
    """Kullback-Leibler loss: integral of f0 * log(f0/f).

    Returns +inf if f has zeros (or negative values) where f0 > 0.
    """
    v0, v1, grid = _aligned_values(f0, f)
    support = v0 > 0.0
    if np.any(v1[support] <= 0.0):
        return math.inf
    integrand = np.zeros(grid.size)
    integrand[support] = v0[support] * (np.log(v0[support]) - np.log(v1[support]))
    return integrate(integrand, grid)


def l1_loss(f0, f) -> float:
    """Integral of |f0 - f|; at most 2 for densities."""
    v0, v1, grid = _aligned_values(f0, f)
    return integrate(np.abs(v0 - v1), grid)


def l2_loss(f0, f) -> float:
    """Square root of the integral of (f0 - f)^2."""
    v0, v1, grid = _aligned_values(f0, f)
    return math.sqrt(integrate((v0 - v1) ** 2, grid))


def hellinger_loss(f0, f) -> float:
    """L2 distance of the square roots; at most sqrt(2) for densities."""
    v0, v1, grid = _aligned_values(f0, f)
    d = np.sqrt(np.clip(v0, 0.0, None)) - np.sqrt(np.clip(v1, 0.0, None))
    return math.sqrt(integrate(d**2, grid))


LOSSES = {
    "kl": kl_loss,
    "l1": l1_loss,
    "l2": l2_loss,
    "hellinger": hellinger_loss,
}
