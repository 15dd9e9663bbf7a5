"""The two analytic target families used in the estimator comparison.

Both are defined through unnormalized positive expressions and normalized
by periodic quadrature:

* skewed von Mises, alpha in [0, 1]:
      v_alpha(u) proportional to (1 + alpha*sin(u+1)) * exp(3*alpha*cos(u-pi))
* w-family, alpha in [0, 2*pi):
      w_alpha(u) proportional to exp(sin(cos(2u) + sin(3u) + alpha))
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from dvpcircle.circle import TWO_PI, AngularGrid, integrate

FAMILIES = ("skewed-vm", "w")


def _unnormalized(family: str, alpha: float):
    if family == "skewed-vm":
        if not 0.0 <= alpha <= 1.0:
            raise ValueError("skewed-vm requires alpha in [0, 1]")

        def raw(u):
            u = np.asarray(u, dtype=float)
            return (1.0 + alpha * np.sin(u + 1.0)) * np.exp(3.0 * alpha * np.cos(u - np.pi))

        return raw
    if family == "w":
        if not 0.0 <= alpha < TWO_PI:
            raise ValueError("w family requires alpha in [0, 2*pi)")

        def raw(u):
            u = np.asarray(u, dtype=float)
            return np.exp(np.sin(np.cos(2.0 * u) + np.sin(3.0 * u) + alpha))

        return raw
    raise ValueError(f"unknown target family {family!r}")


@dataclass(frozen=True)
class TargetDensity:
    """A normalized target density sampled on a grid.

    `values` holds the normalized density at the grid points and
    `norm_const` the integral of the unnormalized expression, so that
    pdf(u) = unnormalized(u) / norm_const at arbitrary angles.
    """

    family: str
    alpha: float
    grid: AngularGrid
    values: np.ndarray = field(repr=False)
    norm_const: float

    def pdf(self, u):
        return _unnormalized(self.family, self.alpha)(u) / self.norm_const


def make_target(family: str, alpha: float, grid: AngularGrid | None = None) -> TargetDensity:
    """Build a normalized target on the given grid (default 8192 points)."""
    if grid is None:
        grid = AngularGrid(8192)
    raw = _unnormalized(family, alpha)
    vals = raw(grid.points)
    norm = integrate(vals, grid)
    return TargetDensity(family=family, alpha=float(alpha), grid=grid,
                         values=vals / norm, norm_const=norm)


def sample_target(target: TargetDensity, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw count i.i.d. angles from the target by rejection sampling.

    Proposals are uniform on the circle; the envelope is 1.01 times the
    grid maximum of the density, guarding against the grid slightly
    undershooting the true maximum.
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    bound = 1.01 * float(target.values.max())
    out = np.empty(count)
    filled = 0
    while filled < count:
        todo = count - filled
        # one round proposes roughly what the acceptance rate requires
        m = int(todo * bound * TWO_PI) + 1
        u = rng.random(m) * TWO_PI
        accept = rng.random(m) * bound < target.pdf(u)
        got = u[accept][:todo]
        out[filled : filled + got.size] = got
        filled += got.size
    return out


def write_target_csv(path, family: str, alphas, grid: AngularGrid | None = None) -> None:
    """Export target curves as CSV with columns angle, a<value> per alpha."""
    if grid is None:
        grid = AngularGrid(2048)
    curves = [make_target(family, a, grid).values for a in alphas]
    header = "angle," + ",".join(f"a{a:g}" for a in alphas)
    data = np.column_stack([grid.points] + curves)
    np.savetxt(path, data, delimiter=",", header=header, comments="")
