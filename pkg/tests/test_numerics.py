import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from wepi_lab import distributions as D
from wepi_lab.numerics import (CONVERGED, DIVERGENT, Estimate, integrate, integrate2d,
                               mc_expectation, ratio)
from wepi_lab.weights import builtin_weight


class TestIntegrate:
    def test_exponential_tail(self):
        r = integrate(lambda x: math.exp(-x), 0, math.inf, 1e-10)
        assert r.status == CONVERGED
        assert abs(r.value - 1) <= max(r.error, 1e-12)

    def test_endpoint_singularity(self):
        r = integrate(lambda x: x ** -0.5 if x > 0 else 0.0, 0, 1, 1e-10)
        assert r.value == pytest.approx(2.0, abs=1e-8)

    def test_gamma_log_singularity(self):
        # E[ln X] for Gamma(0.3): digamma(0.3)
        d = D.Gamma(0.3, 1.0)
        r = integrate(lambda x: math.log(x) * d.pdf1(x), 0, math.inf, 1e-10)
        assert r.value == pytest.approx(-3.502524222200133, abs=1e-7)

    def test_weighted_normal_moment_against_mc(self):
        w = builtin_weight("abs_x2_minus_2")
        d = D.Normal(0, 1)
        q = integrate(lambda x: w(x) * x * x * d.pdf1(x), -math.inf, math.inf, 1e-10,
                      points=w.kinks)
        mc = mc_expectation(d, lambda x: np.abs(x ** 2 - 2) * x ** 2, 10 ** 6, seed=11)
        assert abs(q.value - mc.value) <= mc.error

    def test_divergence_detected(self):
        cauchy = D.Cauchy(0, 1)
        r = integrate(lambda x: abs(x * x - 2) * cauchy.pdf1(x), -math.inf, math.inf, 1e-9)
        assert r.status == DIVERGENT
        assert r.diagnostic

    def test_converged_respects_tolerance(self):
        r = integrate(lambda x: math.exp(-x * x), -math.inf, math.inf, 1e-9)
        assert r.status == CONVERGED
        assert r.error <= 1e-9 * max(1, abs(r.value))
        assert abs(r.value - math.sqrt(math.pi)) <= max(r.error, 1e-14)


class TestIntegrate2d:
    def test_unit_square(self):
        assert integrate2d(lambda x, y: 1.0, (0, 1), (0, 1)).value == pytest.approx(1.0)

    def test_gaussian_plane(self):
        phi = stats.norm.pdf
        r = integrate2d(lambda x, y: phi(x) * phi(y), (-math.inf, math.inf), (-math.inf, math.inf))
        assert r.value == pytest.approx(1.0, abs=1e-7)

    def test_gaussian_conditional_entropy(self):
        # h(Z | Z + N) for Z, N ~ N(0, 1): 1/2 ln(2 pi e / 2)
        g = 1.0

        def f(x, y):
            n = y - math.sqrt(g) * x
            logj = -0.5 * x * x - 0.5 * n * n - math.log(2 * math.pi)
            logv = -0.25 * y * y - 0.5 * math.log(4 * math.pi)
            return -math.exp(logj) * (logj - logv)

        r = integrate2d(f, (-math.inf, math.inf), (-math.inf, math.inf))
        assert r.value == pytest.approx(0.5 * math.log(math.pi * math.e), abs=1e-6)


class TestMonteCarlo:
    def test_unit_variance(self):
        r = mc_expectation(D.Normal(0, 1), lambda x: x ** 2, 10 ** 6, seed=1)
        assert abs(r.value - 1) <= 0.005

    def test_exponential_weight(self):
        r = mc_expectation(D.Exponential(1), lambda x: x * np.exp(-x), 10 ** 6, seed=2)
        assert abs(r.value - 0.25) <= r.error

    def test_cauchy_flagged(self):
        r = mc_expectation(D.Cauchy(0, 1), lambda x: x ** 2, 10 ** 6, seed=3)
        assert r.status == DIVERGENT

    def test_deterministic(self):
        a = mc_expectation(D.Gamma(2, 1), np.sqrt, 1000, seed=5)
        b = mc_expectation(D.Gamma(2, 1), np.sqrt, 1000, seed=5)
        assert a == b

    def test_nonfinite_draws_counted(self):
        r = mc_expectation(D.Normal(0, 1), lambda x: np.where(x > 3, np.inf, x), 10 ** 4, seed=4)
        assert r.status == "not-integrable"
        assert "non-finite" in r.diagnostic

    def test_minimum_draws(self):
        with pytest.raises(ValueError):
            mc_expectation(D.Normal(0, 1), np.abs, 50, seed=0)


def test_quadrature_agrees_with_mc_on_random_pairs():
    rng = np.random.default_rng(2024)
    fams = [lambda: D.Normal(rng.uniform(-1, 1), rng.uniform(0.3, 2)),
            lambda: D.Gamma(rng.uniform(0.5, 5), rng.uniform(0.5, 2)),
            lambda: D.Uniform(-rng.uniform(0, 1), rng.uniform(0.1, 2)),
            lambda: D.Exponential(rng.uniform(0.3, 3))]
    gs = [(np.cos, math.cos), (lambda x: np.exp(-x * x), lambda x: math.exp(-x * x)),
          (np.arctan, math.atan)]
    hits = 0
    for k in range(30):
        d = fams[k % 4]()
        gv, gs_ = gs[k % 3]
        lo, hi = d.support
        q = integrate(lambda x: gs_(x) * d.pdf1(x), lo, hi, 1e-10, points=d.breakpoints,
                      center=d.center, scale=d.scale)
        mc = mc_expectation(d, gv, 10 ** 5, seed=k)
        hits += abs(q.value - mc.value) <= mc.error
    assert hits >= 28


class TestEstimate:
    def test_arithmetic(self):
        a, b = Estimate(1.0, 0.1), Estimate(2.0, 0.2, "slow", "x")
        c = a + b
        assert c.value == 3.0 and c.error == pytest.approx(0.3) and c.status == "slow"
        assert (a - b).value == -1.0
        assert a.scaled(-2).error == pytest.approx(0.2)

    @given(st.floats(0.5, 5), st.floats(0.5, 5))
    @settings(max_examples=30)
    def test_ratio_bound(self, n, d):
        r = ratio(Estimate(n, 1e-6), Estimate(d, 1e-6))
        assert r.value == pytest.approx(n / d)
        assert r.error >= 1e-6 / d
