"""The de la Vallee Poussin density basis.

The degree-n basis consists of the 2n+1 circular densities

    C_{j,n}(u) = 4^n / (2*pi * binom(2n, n)) * ((1 + cos(u - t_j)) / 2)^n,

with centers t_j = 2*pi*j/(2n+1).  This module evaluates the basis, draws
exact samples, computes trigonometric moments, and performs degree
elevation (rewriting degree-n elements exactly in a higher-degree basis).

All binomial ratios go through log-gamma differences so that degrees up to
10^4 stay finite; exact integer arithmetic is used where a closed-form
identity must hold to the last bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import gammaln

from dvpcircle.circle import TWO_PI

# Largest degree for which trigonometric moments use exact integer
# binomials; beyond this, log-gamma differences take over.
_EXACT_MOMENT_MAX_N = 1024


def basis_center(j: int, n: int) -> float:
    """Mode 2*pi*j/(2n+1) of the j-th degree-n basis density."""
    return TWO_PI * j / (2 * n + 1)


def log_norm(n: int) -> float:
    """log(4^n / (2*pi * binom(2n, n))), computed via log-gamma."""
    if n < 0:
        raise ValueError("degree n must be nonnegative")
    return (
        2 * n * math.log(2.0)
        - math.log(TWO_PI)
        - (float(gammaln(2 * n + 1)) - 2.0 * float(gammaln(n + 1)))
    )


@dataclass(frozen=True)
class BasisSpec:
    """Degree n together with the precomputed log normalizing constant."""

    n: int
    log_norm: float = field(init=False)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("degree n must be nonnegative")
        object.__setattr__(self, "log_norm", log_norm(self.n))


def _check_index(j: int, n: int) -> None:
    if not 0 <= j <= 2 * n:
        raise IndexError(f"basis index {j} out of range for degree {n}")


def eval_basis(j: int, n: int, u):
    """Evaluate C_{j,n} at u (scalar or array).

    Works in log space through |cos((u - t_j)/2)|^(2n); the value at the
    antipode of the center, where the cosine vanishes, is exactly 0.
    """
    _check_index(j, n)
    u = np.asarray(u, dtype=float)
    if n == 0:
        out = np.full(u.shape, 1.0 / TWO_PI)
        return float(out) if out.ndim == 0 else out
    c = np.abs(np.cos((u - basis_center(j, n)) / 2.0))
    with np.errstate(divide="ignore"):
        out = np.where(c > 0.0, np.exp(log_norm(n) + 2.0 * n * np.log(c)), 0.0)
    if out.ndim == 0:
        return float(out)
    return out


def basis_matrix(n: int, points: np.ndarray) -> np.ndarray:
    """Matrix B with B[j, k] = C_{j,n}(points[k]) for j = 0..2n."""
    points = np.asarray(points, dtype=float)
    centers = TWO_PI * np.arange(2 * n + 1) / (2 * n + 1)
    c = np.abs(np.cos((points[None, :] - centers[:, None]) / 2.0))
    if n == 0:
        return np.full((1, points.size), 1.0 / TWO_PI)
    with np.errstate(divide="ignore"):
        return np.where(c > 0.0, np.exp(log_norm(n) + 2.0 * n * np.log(c)), 0.0)


def _moment_magnitude(n: int, p: int) -> float:
    """binom(2n, n-p) / binom(2n, n) for 0 <= p <= n."""
    if n <= _EXACT_MOMENT_MAX_N:
        return float(Fraction(math.comb(2 * n, n - p), math.comb(2 * n, n)))
    return float(
        np.exp(2.0 * gammaln(n + 1) - gammaln(n - p + 1) - gammaln(n + p + 1))
    )


def trig_moment(j: int, n: int, p: int) -> complex:
    """E(e^{i p U}) for U distributed with density C_{j,n}.

    Vanishes for |p| > n; otherwise equals the binomial ratio
    binom(2n, n-p)/binom(2n, n) rotated by the center phase.
    """
    _check_index(j, n)
    p = int(p)
    if abs(p) > n:
        return 0j
    mag = _moment_magnitude(n, abs(p))
    phase = TWO_PI * j * p / (2 * n + 1)
    return mag * complex(math.cos(phase), math.sin(phase))


def circular_variance(n: int) -> float:
    """1 - |E(e^{iU})| for the degree-n basis; equals 1/(n+1) exactly.

    Evaluated in exact rational arithmetic before the final float
    conversion so the closed form holds to the last bit.
    """
    if n < 0:
        raise ValueError("degree n must be nonnegative")
    if n == 0:
        return 1.0
    return float(1 - Fraction(math.comb(2 * n, n - 1), math.comb(2 * n, n)))


def sample_basis(j: int, n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw count i.i.d. angles from C_{j,n}.

    Uses the exact construction U = (1 - 2V) * arccos(1 - 2W) with
    V ~ Bernoulli(1/2) and W ~ Beta(1/2, 1/2 + n), then rotates by the
    basis center.  W is built from two gamma draws so each variate
    consumes a fixed pattern of the stream.
    """
    _check_index(j, n)
    if count < 0:
        raise ValueError("count must be nonnegative")
    g1 = rng.gamma(0.5, size=count)
    g2 = rng.gamma(0.5 + n, size=count)
    w = g1 / (g1 + g2)
    sign = np.where(rng.random(count) < 0.5, 1.0, -1.0)
    u = sign * np.arccos(1.0 - 2.0 * w)
    return np.mod(u + basis_center(j, n), TWO_PI)


@dataclass(frozen=True)
class ElevationMatrix:
    """Coefficients rewriting the degree-n basis in the degree-(n+r) basis.

    Row j holds the weights of C_{j,n} on C_{0,n+r}, ..., C_{2(n+r),n+r};
    every row sums to 1 and r = 0 yields the identity.
    """

    n: int
    r: int
    d: np.ndarray = field(repr=False)


def elevation_matrix(n: int, r: int) -> ElevationMatrix:
    """Degree-elevation coefficients d[j, l] for source degree n, raise r.

    Entries follow the closed-form cosine sum with all binomial ratios
    computed as log-gamma differences.
    """
    if n < 1:
        raise ValueError("source degree n must be at least 1")
    if r < 0:
        raise ValueError("elevation amount r must be nonnegative")
    m = n + r
    k = np.arange(n)
    # a_k = binom(2m, m) * binom(2n, k) / (binom(2n, n) * binom(2m, k + r)),
    # with the common gammaln(2m+1) and gammaln(2n+1) terms cancelled
    log_a = (
        2.0 * gammaln(n + 1)
        - 2.0 * gammaln(m + 1)
        - gammaln(k + 1)
        - gammaln(2 * n - k + 1)
        + gammaln(k + r + 1)
        + gammaln(2 * m - k - r + 1)
    )
    a = np.exp(log_a)
    j = np.arange(2 * n + 1)
    ell = np.arange(2 * m + 1)
    freq = n - k  # cosine frequencies, one per summand
    ang = (
        freq[:, None, None] * np.pi * 2.0 * ell[None, None, :] / (2 * m + 1)
        - freq[:, None, None] * np.pi * 2.0 * j[None, :, None] / (2 * n + 1)
    )
    d = (1.0 + 2.0 * np.einsum("k,kjl->jl", a, np.cos(ang))) / (2 * m + 1)
    return ElevationMatrix(n=n, r=r, d=d)


def elevate_to_nonnegative(
    coeffs, n: int, max_r: int | None = None
) -> tuple[int, np.ndarray] | None:
    """Search for the smallest elevation r making all coefficients nonnegative.

    Parameters
    ----------
    coeffs : array-like
        Signed degree-n coefficients summing to 1.  The induced function is
        only representable as a density mixture if it is nonnegative; the
        caller is responsible for having checked positivity.
    n : int
        Source degree.
    max_r : int, optional
        Search cap, default 64*n.

    Returns
    -------
    (r, weights) on success, where weights is the nonnegative elevated
    coefficient vector at degree n + r, or None if the cap is exhausted
    (the polynomial may be non-positive, or the cap too small).
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (2 * n + 1,):
        raise ValueError("coefficient vector has wrong length for degree n")
    if abs(coeffs.sum() - 1.0) > 1e-9:
        raise ValueError("coefficients must sum to 1")
    if max_r is None:
        max_r = 64 * n
    for r in range(max_r + 1):
        if r == 0:
            elevated = coeffs
        else:
            elevated = coeffs @ elevation_matrix(n, r).d
        if np.all(elevated >= -1e-13):
            return r, np.clip(elevated, 0.0, None)
    return None
