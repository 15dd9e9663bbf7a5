"""Nonnegative trigonometric sum densities and their maximum likelihood fit.

The family consists of circular densities |sum_k c_k e^{iku}|^2 with
complex coefficients constrained to the sphere sum_k |c_k|^2 = 1/(2*pi).
Fitting maximizes the log-likelihood by projected gradient ascent on that
sphere with a monotone backtracking line search and random restarts;
model order is selected by AIC or BIC.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from dvpcircle.circle import TWO_PI

SPHERE_RADIUS_SQ = 1.0 / TWO_PI

_MAX_ITERS = 500
_REL_TOL = 1e-8


@dataclass(frozen=True)
class NntsModel:
    """Trigonometric degree M and complex coefficients on the sphere."""

    degree: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.degree + 1,):
            raise ValueError("coefficient vector has wrong length for degree")
        if abs(np.sum(np.abs(c) ** 2) - SPHERE_RADIUS_SQ) > 1e-12:
            raise ValueError("coefficients must satisfy sum |c_k|^2 = 1/(2*pi)")
        object.__setattr__(self, "coeffs", c)


def uniform_model() -> NntsModel:
    """The degree-0 model, whose density is constant 1/(2*pi)."""
    return NntsModel(degree=0, coeffs=np.array([math.sqrt(SPHERE_RADIUS_SQ)], dtype=complex))


def random_model(M: int, rng: np.random.Generator) -> NntsModel:
    """Coefficients uniform on the constraint sphere (complex normal, scaled)."""
    z = rng.standard_normal(M + 1) + 1j * rng.standard_normal(M + 1)
    z *= math.sqrt(SPHERE_RADIUS_SQ) / np.linalg.norm(z)
    return NntsModel(degree=M, coeffs=z)


def _project_to_sphere(c: np.ndarray) -> np.ndarray:
    return c * (math.sqrt(SPHERE_RADIUS_SQ) / np.linalg.norm(c))


def nnts_eval(model: NntsModel, u):
    """Density |sum_k c_k e^{iku}|^2 at u (scalar or array)."""
    u = np.asarray(u, dtype=float)
    k = np.arange(model.degree + 1)
    g = np.exp(1j * np.atleast_1d(u)[:, None] * k[None, :]) @ model.coeffs
    out = np.abs(g) ** 2
    if u.ndim == 0:
        return float(out[0])
    return out


def _phase_matrix(data: np.ndarray, M: int) -> np.ndarray:
    return np.exp(1j * data[:, None] * np.arange(M + 1)[None, :])


def loglik(coeffs: np.ndarray, E: np.ndarray) -> float:
    """Log-likelihood of the data behind the phase matrix E; -inf at zeros."""
    s = np.abs(E @ coeffs) ** 2
    if np.any(s <= 0.0):
        return -math.inf
    return float(np.sum(np.log(s)))


def loglik_gradient(coeffs: np.ndarray, E: np.ndarray) -> np.ndarray:
    """Euclidean gradient in the real-imaginary parameterization.

    Returned as a complex vector whose real and imaginary parts are the
    partial derivatives with respect to Re(c_k) and Im(c_k).
    """
    g = E @ coeffs
    return 2.0 * np.conj(E.T @ (1.0 / g))


def _ascend(
    c: np.ndarray, E: np.ndarray, trace: list | None = None
) -> tuple[np.ndarray, float]:
    """Projected gradient ascent from c; returns the local maximizer found.

    When `trace` is given, (loglik, sphere defect) is appended after every
    accepted step.
    """
    ll = loglik(c, E)
    step = 1.0
    for _ in range(_MAX_ITERS):
        grad = loglik_gradient(c, E)
        # tangential component on the sphere (real inner product)
        radial = np.real(np.vdot(c, grad)) / SPHERE_RADIUS_SQ
        tangent = grad - radial * c
        gnorm = np.linalg.norm(tangent)
        if gnorm == 0.0:
            break
        step = min(step * 2.0, 1.0 / gnorm)
        improved = False
        for _ in range(50):
            cand = _project_to_sphere(c + step * tangent)
            cand_ll = loglik(cand, E)
            if cand_ll >= ll:
                improved = cand_ll > ll
                new_ll = cand_ll
                break
            step /= 2.0
        else:
            break
        if not improved:
            break
        rel = (new_ll - ll) / (abs(ll) + 1.0)
        c, ll = cand, new_ll
        if trace is not None:
            defect = abs(float(np.sum(np.abs(c) ** 2)) - SPHERE_RADIUS_SQ)
            trace.append((ll, defect))
        if rel < _REL_TOL:
            break
    return c, ll


@dataclass(frozen=True)
class MleResult:
    """Best model found, its log-likelihood, and a degeneracy flag."""

    model: NntsModel
    loglik: float
    boundary_suspect: bool


def nnts_mle(data, M: int, restarts: int = 2, rng: np.random.Generator | None = None) -> MleResult:
    """Maximum likelihood fit of the degree-M model to angular data.

    Runs `restarts` independent ascents from random points on the sphere
    and keeps the best.  Deterministic given the generator state.

    Raises
    ------
    ValueError
        If data is empty.
    """
    data = np.asarray(data, dtype=float)
    if data.size == 0:
        raise ValueError("data must be nonempty")
    if M < 0:
        raise ValueError("degree M must be nonnegative")
    # All-identical samples push the likelihood toward the sphere boundary
    # of point-mass-like fits; the fit is still well defined for fixed M.
    suspect = M >= 1 and bool(np.all(np.mod(data - data[0], TWO_PI) == 0.0))
    if M == 0:
        return MleResult(uniform_model(), -data.size * math.log(TWO_PI), suspect)
    if rng is None:
        rng = np.random.default_rng()
    E = _phase_matrix(data, M)
    best_c, best_ll = None, -math.inf
    for _ in range(max(1, restarts)):
        c0 = random_model(M, rng).coeffs
        c, ll = _ascend(c0, E)
        if ll > best_ll:
            best_c, best_ll = c, ll
    return MleResult(NntsModel(degree=M, coeffs=_project_to_sphere(best_c)), best_ll, suspect)


def information_criterion(ll: float, M: int, n_obs: int, criterion: str) -> float:
    """AIC or BIC with k = 2M free real parameters.

    The M+1 complex coefficients carry 2M+2 real numbers; the sphere
    constraint and the global phase each remove one.
    """
    k = 2 * M
    if criterion == "aic":
        return -2.0 * ll + 2.0 * k
    if criterion == "bic":
        return -2.0 * ll + k * math.log(n_obs)
    raise ValueError(f"unknown criterion {criterion!r}")


def select_by_ic(
    data,
    m_range=range(0, 8),
    criterion: str = "bic",
    rng: np.random.Generator | None = None,
    restarts: int = 2,
) -> MleResult:
    """Fit every degree in m_range and return the fit minimizing the criterion."""
    data = np.asarray(data, dtype=float)
    if data.size == 0:
        raise ValueError("data must be nonempty")
    m_list = list(m_range)
    if not m_list:
        raise ValueError("m_range must be nonempty")
    if rng is None:
        rng = np.random.default_rng()
    best, best_ic = None, math.inf
    for M in m_list:
        fit = nnts_mle(data, M, restarts=restarts, rng=rng)
        ic = information_criterion(fit.loglik, M, data.size, criterion)
        if ic < best_ic:
            best, best_ic = fit, ic
    return best
