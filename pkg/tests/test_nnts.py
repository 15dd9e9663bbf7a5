import math

import numpy as np
import pytest

from dvpcircle.circle import TWO_PI, integrate
from dvpcircle.nnts import (
    NntsModel,
    _ascend,
    _phase_matrix,
    information_criterion,
    loglik,
    loglik_gradient,
    nnts_eval,
    nnts_mle,
    random_model,
    select_by_ic,
    uniform_model,
)
from dvpcircle.targets import sample_target, make_target


def numeric_gradient(c, E, h=1e-6):
    """Central differences in the real-imaginary parameterization."""
    out = np.zeros_like(c)
    for k in range(c.size):
        for imag in (False, True):
            dc = np.zeros_like(c)
            dc[k] = 1j * h if imag else h
            d = (loglik(c + dc, E) - loglik(c - dc, E)) / (2 * h)
            out[k] += 1j * d if imag else d
    return out


class TestEval:
    def test_degree_zero_uniform(self, rng):
        u = rng.random(30) * TWO_PI
        assert np.allclose(nnts_eval(uniform_model(), u), 1.0 / TWO_PI)

    def test_parseval_normalization(self, grid2048, rng):
        for _ in range(25):
            m = random_model(int(rng.integers(0, 8)), rng)
            total = integrate(nnts_eval(m, grid2048.points), grid2048)
            assert total == pytest.approx(1.0, abs=1e-9)

    def test_value_oracle_degree_one(self):
        # direct complex arithmetic: |c0 + c1|^2 at u = 0
        c = np.array([1 / math.sqrt(4 * math.pi)] * 2, dtype=complex)
        m = NntsModel(degree=1, coeffs=c)
        assert nnts_eval(m, 0.0) == pytest.approx(abs(c[0] + c[1]) ** 2)
        assert nnts_eval(m, 0.0) == pytest.approx(1.0 / math.pi)

    def test_global_phase_invariance(self, grid2048, rng):
        m = random_model(4, rng)
        rotated = NntsModel(degree=4, coeffs=m.coeffs * np.exp(0.7j))
        a = nnts_eval(m, grid2048.points)
        b = nnts_eval(rotated, grid2048.points)
        assert np.abs(a - b).max() < 1e-12

    def test_constraint_enforced(self):
        with pytest.raises(ValueError):
            NntsModel(degree=1, coeffs=np.array([1.0, 0.0], dtype=complex))


class TestGradient:
    def test_matches_central_differences(self, rng):
        data = rng.random(40) * TWO_PI
        for _ in range(20):
            M = int(rng.integers(1, 6))
            E = _phase_matrix(data, M)
            c = random_model(M, rng).coeffs
            g = loglik_gradient(c, E)
            num = numeric_gradient(c, E)
            assert np.abs(g - num).max() / np.abs(g).max() < 1e-4


class TestMle:
    def test_degree_zero_closed_form(self, rng):
        data = rng.random(123) * TWO_PI
        res = nnts_mle(data, 0, rng=rng)
        assert res.model.degree == 0
        assert res.loglik == pytest.approx(-123 * math.log(TWO_PI))

    def test_uniform_data_near_optimal(self):
        rng = np.random.default_rng(5)
        data = rng.random(500) * TWO_PI
        res = nnts_mle(data, 1, restarts=2, rng=rng)
        assert abs(res.loglik - (-500 * math.log(TWO_PI))) < 2.0

    def test_recovers_known_model(self, grid2048):
        true = random_model(2, np.random.default_rng(42))
        truth = nnts_eval(true, grid2048.points)
        rng = np.random.default_rng(7)
        draws = []
        bound = truth.max() * 1.05
        while len(draws) < 200:
            u = rng.random(1000) * TWO_PI
            keep = rng.random(1000) * bound < nnts_eval(true, u)
            draws.extend(u[keep][: 200 - len(draws)])
        res = nnts_mle(np.array(draws), 2, restarts=2, rng=np.random.default_rng(3))
        est = nnts_eval(res.model, grid2048.points)
        assert integrate(np.abs(est - truth), grid2048) < 0.25

    def test_monotone_and_on_sphere(self, rng):
        data = rng.random(60) * TWO_PI
        E = _phase_matrix(data, 3)
        for _ in range(5):
            trace = []
            _ascend(random_model(3, rng).coeffs, E, trace=trace)
            lls = [t[0] for t in trace]
            assert all(b >= a for a, b in zip(lls, lls[1:]))
            assert all(t[1] < 1e-10 for t in trace)

    def test_identical_data_flagged(self):
        data = np.full(20, 1.3)
        res = nnts_mle(data, 2, rng=np.random.default_rng(0))
        assert res.boundary_suspect
        assert math.isfinite(res.loglik)
        res0 = nnts_mle(data, 0, rng=np.random.default_rng(0))
        assert not res0.boundary_suspect

    def test_empty_data_rejected(self):
        with pytest.raises(ValueError):
            nnts_mle(np.array([]), 1)


class TestSelectByIc:
    def test_bic_prefers_flat_on_uniform(self):
        data = np.random.default_rng(31).random(300) * TWO_PI
        fit = select_by_ic(data, range(0, 8), "bic", np.random.default_rng(77))
        assert fit.model.degree <= 1

    def test_aic_at_least_bic_degree(self):
        # penalty ordering: 2k < k*log(30), so AIC tolerates more parameters
        wins = 0
        runs = 100
        for s in range(runs):
            rng = np.random.default_rng(1000 + s)
            data = sample_target(make_target("skewed-vm", 0.7), 30, rng)
            fits = {M: nnts_mle(data, M, restarts=2, rng=rng) for M in range(5)}
            by = {
                crit: min(
                    fits,
                    key=lambda M: information_criterion(fits[M].loglik, M, 30, crit),
                )
                for crit in ("aic", "bic")
            }
            wins += by["aic"] >= by["bic"]
        assert wins >= 90

    def test_empty_range_rejected(self):
        with pytest.raises(ValueError):
            select_by_ic(np.array([1.0]), m_range=[], criterion="bic")

    def test_unknown_criterion_rejected(self):
        with pytest.raises(ValueError):
            information_criterion(-1.0, 1, 10, "dic")
