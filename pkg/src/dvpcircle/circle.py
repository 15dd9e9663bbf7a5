"""Angular arithmetic, the uniform bin partition, and periodic quadrature.

Angles live on the circle identified with the reals modulo 2*pi and are
stored as their canonical representative in [0, 2*pi).  Every function
accepts scalars or numpy arrays and returns the matching shape.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi


def wrap(x):
    """Reduce an angle (or array of angles) to its representative in [0, 2*pi).

    Raises
    ------
    ValueError
        If any input is NaN or infinite.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("angles must be finite")
    out = np.mod(x, TWO_PI)
    # np.mod can return TWO_PI itself for tiny negative inputs; fold it back.
    out = np.where(out >= TWO_PI, out - TWO_PI, out)
    if out.ndim == 0:
        return float(out)
    return out


def ang_dist(u, v):
    """Arc-length distance on the circle, in [0, pi]."""
    d = np.abs(np.asarray(u, dtype=float) - np.asarray(v, dtype=float)) % TWO_PI
    out = np.minimum(d, TWO_PI - d)
    if out.ndim == 0:
        return float(out)
    return out


def bin_width(n: int) -> float:
    """Arc length 2*pi/(2n+1) of each cell of the degree-n partition."""
    return TWO_PI / (2 * n + 1)


def bin_index(u, n: int):
    """Index j of the partition cell containing the angle u.

    The degree-n partition consists of 2n+1 half-open arcs of equal length,
    the j-th centered at 2*pi*j/(2n+1).  Cells are left-closed; cell 0 wraps
    across angle 0.
    """
    if n < 0:
        raise ValueError("degree n must be nonnegative")
    t = np.asarray(u, dtype=float) * (2 * n + 1) / TWO_PI
    j = np.floor(t + 0.5).astype(np.int64) % (2 * n + 1)
    if j.ndim == 0:
        return int(j)
    return j


def bin_bounds(j: int, n: int) -> tuple[float, float]:
    """Endpoints (lo, hi) of cell j, with lo possibly exceeding hi for the
    wrapped cell 0.  Membership is lo <= u < hi taken modulo 2*pi."""
    if not 0 <= j <= 2 * n:
        raise IndexError(f"bin index {j} out of range for degree {n}")
    half = np.pi / (2 * n + 1)
    center = TWO_PI * j / (2 * n + 1)
    return wrap(center - half), center + half


@dataclass(frozen=True)
class AngularGrid:
    """Uniform evaluation grid on the circle with rectangle-rule weights.

    Attributes
    ----------
    size : int
        Number of points G.
    points : ndarray
        The angles 2*pi*k/G, k = 0..G-1.
    weight : float
        Quadrature weight 2*pi/G shared by every point.
    """

    size: int
    points: np.ndarray = field(repr=False)
    weight: float

    def __init__(self, size: int):
        if size < 1:
            raise ValueError("grid size must be positive")
        object.__setattr__(self, "size", int(size))
        object.__setattr__(self, "points", TWO_PI * np.arange(size) / size)
        object.__setattr__(self, "weight", TWO_PI / size)

    def __eq__(self, other):
        return isinstance(other, AngularGrid) and other.size == self.size

    def __hash__(self):
        return hash(("AngularGrid", self.size))


def integrate(values, grid: AngularGrid) -> float:
    """Rectangle-rule integral over the circle of values sampled on the grid.

    Exact (up to rounding) for trigonometric polynomials of degree below
    G/2, and spectrally accurate for smooth periodic integrands.
    """
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.size,):
        raise ValueError("values are not aligned with the grid")
    return float(np.sum(values) * grid.weight)
