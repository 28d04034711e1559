import math

import numpy as np
import pytest
from scipy import stats

from wepi_lab import distributions as D


class TestMakeDist:
    def test_examples(self):
        assert D.make_dist("normal:mu=0,sigma=1").pdf1(0.0) == pytest.approx(0.398942, abs=1e-6)
        assert D.make_dist("uniform:a=0,b=2").pdf1(1.0) == 0.5

    def test_logheavy_profile(self):
        # the displayed profile at e is 1/(2e); the density is that times 2/pi
        assert D.logheavy_raw_g(math.e) == pytest.approx(0.183940, abs=1e-6)
        d = D.make_dist("logheavy")
        assert d.pdf1(math.e) == pytest.approx(0.183940 * 2 / math.pi, abs=1e-6)
        assert d.mass().value == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("spec,name", [
        ("normal:sigma=0", "sigma"), ("gamma:beta=-1", "beta"), ("gamma:beta=1,lambda=0", "lambda"),
        ("uniform:a=1,b=1", "b"), ("cauchy:theta=-2", "theta"), ("exp:lambda=-1", "lambda")])
    def test_invalid_parameters(self, spec, name):
        with pytest.raises(D.DistributionError, match=name):
            D.make_dist(spec)

    @pytest.mark.parametrize("spec", ["weibull:k=1", "normal:s=1", "gamma", "normal:sigma=abc"])
    def test_malformed(self, spec):
        with pytest.raises(D.DistributionError):
            D.make_dist(spec)

    def test_sum_spec(self):
        d = D.make_dist("sum:exp:lambda=1+exp:lambda=2")
        assert isinstance(d, D.ExpMixture)
        assert d.pdf1(1.0) == pytest.approx(0.465088, abs=1e-6)

    @pytest.mark.parametrize("spec", ["normal:mu=0.3,sigma=2", "gamma:beta=0.4,lambda=2",
                                      "gamma:beta=3,lambda=0.5", "exp:lambda=3", "uniform:a=-1,b=2",
                                      "cauchy:mu=1,theta=0.2", "logheavy"])
    def test_mass_and_nonnegativity(self, spec):
        d = D.make_dist(spec)
        assert d.mass().value == pytest.approx(1.0, abs=1e-8)
        xs = d.sample(2000, 1)
        assert (d.pdf(xs) >= 0).all()


CLOSED_PAIRS = [
    (D.Normal(0.2, 1.0), D.Normal(-1.0, 0.5)),
    (D.Gamma(1.5, 2.0), D.Gamma(2.5, 2.0)),
    (D.Exponential(1.0), D.Exponential(2.0)),
    (D.Uniform(0.0, 1.0), D.Uniform(0.0, 3.0)),
    (D.Uniform(-0.5, 1.0), D.Uniform(0.2, 0.7)),
    (D.Cauchy(0.0, 1.0), D.Cauchy(1.0, 0.5)),
    (D.Gamma(1.7, 1.3), D.Uniform(0.5, 2.0)),
    (D.Exponential(1.5), D.Exponential(1.5)),
]


class TestConvolve:
    def test_examples(self):
        n = D.convolve(D.Normal(0, 1), D.Normal(0, 1))
        assert n.pdf1(0.0) == pytest.approx(1 / math.sqrt(4 * math.pi))
        t = D.convolve(D.Uniform(0, 1), D.Uniform(0, 3))
        assert isinstance(t, D.Trapezoid)
        assert t.pdf1(2.0) == pytest.approx(1 / 3)
        assert D.convolve(D.Exponential(1), D.Exponential(2)).pdf1(1.0) == \
            pytest.approx(2 * (math.exp(-1) - math.exp(-2)))

    def test_equal_rates_routed_to_gamma(self):
        g = D.convolve(D.Exponential(1.5), D.Exponential(1.5))
        assert isinstance(g, D.Gamma) and g.beta == 2.0 and g.lam == 1.5

    def test_unequal_gamma_rates_numeric(self):
        assert isinstance(D.convolve(D.Gamma(2, 1), D.Gamma(2, 3)), D.NumericSum)

    def test_trapezoid_corners(self):
        t = D.Trapezoid(0.0, 1.0, 0.0, 3.0)
        A, C1, C2, B = t.corners
        assert A <= C1 <= C2 <= B
        assert t.mass().value == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("d1,d2", CLOSED_PAIRS)
    def test_closed_form_matches_numeric(self, d1, d2):
        closed = D.convolve(d1, d2)
        assert not isinstance(closed, D.NumericSum)
        num = D.NumericSum(d1, d2)
        xs = closed.sample(50, 9)
        for x in xs:
            assert closed.pdf1(x) == pytest.approx(num.pdf1(x), abs=1e-7)

    def test_numeric_sum_cache(self):
        s = D.NumericSum(D.Gamma(2, 1), D.Normal(0, 1))
        a = s.pdf1(1.3)
        assert s.pdf1(1.3) == a
        assert s.mass().value == pytest.approx(1.0, abs=1e-7)


class TestSample:
    def test_uniform_mean(self):
        x = D.sample(D.Uniform(0, 1), 10 ** 6, seed=0)
        assert abs(x.mean() - 0.5) < 0.002

    def test_reproducible(self):
        a = D.sample(D.Normal(0, 1), 10 ** 6, seed=123)
        b = D.sample(D.Normal(0, 1), 10 ** 6, seed=123)
        assert np.array_equal(a, b)

    def test_logheavy_support(self):
        x = D.sample(D.LogHeavy(), 10 ** 5, seed=5)
        assert (x > 1).all()
        # mass past the float range: 1 - (2/pi) atan(ln(max float)) ~ 9e-4
        assert np.isinf(x).mean() == pytest.approx(8.98e-4, abs=3.5e-4)

    def test_numeric_sum_is_sum_of_draws(self):
        s = D.NumericSum(D.Gamma(2, 1), D.Normal(0, 1))
        assert s.sample(10, 3).shape == (10,)

    @pytest.mark.parametrize("d", [D.Normal(1, 2), D.Gamma(0.7, 1.5), D.Exponential(2),
                                   D.Uniform(-1, 2), D.Cauchy(0, 1), D.LogHeavy(),
                                   D.ExpMixture(1.0, 3.0), D.Trapezoid(0, 1, 0, 2.5),
                                   D.GammaUniformSum(D.Gamma(2, 1), 0.5, 1.5)])
    def test_chi_square(self, d):
        n, bins = 10 ** 5, 50
        x = d.sample(n, 17)
        # equal-probability bins from the empirical quantiles of an independent draw
        ref = d.sample(n, 18)
        edges = np.quantile(ref[np.isfinite(ref)], np.linspace(0, 1, bins + 1))
        edges[0], edges[-1] = -np.inf, np.inf
        probs = np.array([_prob(d, a, b) for a, b in zip(edges[:-1], edges[1:])])
        counts, _ = np.histogram(x, edges)
        assert probs.sum() == pytest.approx(1.0, abs=1e-6)
        p = stats.chisquare(counts, probs / probs.sum() * n).pvalue
        assert p > 1e-3


def _prob(d, a, b):
    from wepi_lab.numerics import integrate
    lo, hi = d.support
    a, b = max(a, lo), min(b, hi)
    if a >= b:
        return 0.0
    if d.log_domain:
        return d.cdf1(b) - d.cdf1(a)
    return integrate(d.pdf1, a, b, 1e-10, points=[p for p in d.breakpoints if a < p < b],
                     center=min(max(d.center, a), b) if math.isinf(a) or math.isinf(b) else None,
                     scale=d.scale).value
