"""Parametric densities, their sums and a spec-string factory.

Every distribution exposes a scalar ``pdf1``/``logpdf1`` pair built on
``math`` (these sit inside QUADPACK callbacks) and array versions
``pdf``/``logpdf``.  ``expect(g)`` integrates g(x, ln f(x)) f(x) over the support with
the right break points; heavy logarithmic tails are integrated in
u = ln x.
"""
from __future__ import annotations

import math
import re
import threading
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .numerics import DEFAULT_TOL, Estimate, integrate

LN_SQRT_2PI = 0.5 * math.log(2 * math.pi)
INF = math.inf
_U_OVERFLOW = 709.78
_X_MAX = 1.7976931348623157e308

CLOSED = "closed-form"
MIXTURE = "mixture"
TRAPEZOID = "trapezoid"
NUMERIC = "numeric"


class DistributionError(ValueError):
    pass


def _need(cond: bool, name: str, constraint: str, value):
    if not cond:
        raise DistributionError(f"invalid parameter {name}={value!r}: requires {constraint}")


def _f(v) -> str:
    return repr(float(v))


class Dist:
    """Shared behaviour; subclasses are frozen dataclasses."""

    family = "base"
    conv = CLOSED
    log_domain = False  # integrate in u = ln x

    # -- required by subclasses: support, pdf1, logpdf1, sample, spec, center, scale
    breakpoints: tuple = ()
    rough_points: tuple = ()  # points where the density or its log is not smooth (|x - p|^a, ln|x - p|)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.vectorize(self.pdf1, otypes=[float])(x)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.vectorize(self.logpdf1, otypes=[float])(x)

    def neg_log_pdf1(self, x: float) -> float:
        """-ln f(x), with the 0 ln 0 = 0 convention left to the caller (returns 0 where f = 0)."""
        lp = self.logpdf1(x)
        return 0.0 if lp == -INF else -lp

    def logpdf_u(self, u: float) -> float:
        """Log-density of ln X (only used when ``log_domain``)."""
        x = math.exp(u) if u < _U_OVERFLOW else INF
        lp = self.logpdf1(x) if x < INF else -INF
        return lp + u if lp > -INF else -INF

    def expect(self, g, tol: float = DEFAULT_TOL) -> Estimate:
        """int g(x, ln f(x)) f(x) dx over the support; points with f = 0 contribute 0."""
        lo, hi = self.support
        if self.log_domain:
            def k(u):
                lfu = self.logpdf_u(u)
                if lfu == -INF:
                    return 0.0
                x = math.exp(u) if u < _U_OVERFLOW else _X_MAX
                return g(x, lfu - u) * math.exp(lfu)
            return integrate(k, math.log(lo), math.log(hi) if hi < INF else INF, tol,
                             center=math.log(lo) if lo > 0 else 0.0, scale=0.25)

        def k(x):
            lf = self.logpdf1(x)
            if lf == -INF:
                return 0.0
            return g(x, lf) * math.exp(lf)
        return integrate(k, lo, hi, tol, points=self.breakpoints, center=self.center,
                         scale=self.scale)

    def mass(self, tol: float = DEFAULT_TOL) -> Estimate:
        return self.expect(lambda x, lf: 1.0, tol)

    def self_test(self, tol: float = 1e-8) -> None:
        m = self.mass(min(tol, 1e-9))
        if not m.ok or abs(m.value - 1.0) > tol:
            raise DistributionError(f"{self.spec}: density integrates to {m.value!r} ({m.status})")

    def shannon_entropy(self) -> float | None:
        return None

    @property
    def bounded_density(self) -> bool:
        return True

    def rng(self, seed):
        return np.random.default_rng(seed)


# ------------------------------------------------------------------ families

@dataclass(frozen=True)
class Normal(Dist):
    mu: float = 0.0
    sigma: float = 1.0
    family = "normal"

    def __post_init__(self):
        _need(self.sigma > 0 and math.isfinite(self.sigma), "sigma", "sigma > 0", self.sigma)
        _need(math.isfinite(self.mu), "mu", "finite mu", self.mu)

    @property
    def support(self):
        return (-INF, INF)

    @property
    def center(self):
        return self.mu

    @property
    def scale(self):
        return self.sigma

    @property
    def mean(self):
        return self.mu

    @property
    def variance(self):
        return self.sigma ** 2

    def logpdf1(self, x):
        z = (x - self.mu) / self.sigma
        return -0.5 * z * z - LN_SQRT_2PI - math.log(self.sigma)

    def pdf1(self, x):
        return math.exp(self.logpdf1(x))

    def logpdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mu) / self.sigma
        return -0.5 * z * z - LN_SQRT_2PI - math.log(self.sigma)

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def cdf1(self, x):
        return 0.5 * math.erfc(-(x - self.mu) / (self.sigma * math.sqrt(2)))

    def sample(self, n, seed):
        return self.rng(seed).normal(self.mu, self.sigma, n)

    def shannon_entropy(self):
        return 0.5 * math.log(2 * math.pi * math.e * self.sigma ** 2)

    @property
    def spec(self):
        return f"normal:mu={_f(self.mu)},sigma={_f(self.sigma)}"


@dataclass(frozen=True)
class Gamma(Dist):
    beta: float = 1.0
    lam: float = 1.0
    family = "gamma"

    def __post_init__(self):
        _need(self.beta > 0 and math.isfinite(self.beta), "beta", "beta > 0", self.beta)
        _need(self.lam > 0 and math.isfinite(self.lam), "lambda", "lambda > 0", self.lam)

    @property
    def support(self):
        return (0.0, INF)

    @property
    def center(self):
        return self.beta / self.lam

    @property
    def scale(self):
        return max(math.sqrt(self.beta), 1.0) / self.lam

    @property
    def mean(self):
        return self.beta / self.lam

    @property
    def variance(self):
        return self.beta / self.lam ** 2

    @property
    def _lognorm(self):
        return self.beta * math.log(self.lam) - math.lgamma(self.beta)

    def logpdf1(self, x):
        if x <= 0:
            if x == 0 and self.beta == 1:
                return self._lognorm
            return -INF if (x < 0 or self.beta > 1) else INF
        return self._lognorm + (self.beta - 1) * math.log(x) - self.lam * x

    def pdf1(self, x):
        lp = self.logpdf1(x)
        return 0.0 if lp == -INF else math.exp(lp)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self._lognorm + special.xlogy(self.beta - 1, x) - self.lam * x
        return np.where(x < 0, -INF, out)

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def cdf1(self, x):
        return float(special.gammainc(self.beta, self.lam * x)) if x > 0 else 0.0

    def sf1(self, x):
        return float(special.gammaincc(self.beta, self.lam * x)) if x > 0 else 1.0

    def sample(self, n, seed):
        return self.rng(seed).gamma(self.beta, 1.0 / self.lam, n)

    def shannon_entropy(self):
        b = self.beta
        return b - math.log(self.lam) + math.lgamma(b) + (1 - b) * float(special.digamma(b))

    @property
    def bounded_density(self):
        return self.beta >= 1

    @property
    def rough_points(self):
        return () if self.beta == 1 else (0.0,)

    @property
    def spec(self):
        return f"gamma:beta={_f(self.beta)},lambda={_f(self.lam)}"


@dataclass(frozen=True)
class Exponential(Dist):
    lam: float = 1.0
    family = "exp"

    def __post_init__(self):
        _need(self.lam > 0 and math.isfinite(self.lam), "lambda", "lambda > 0", self.lam)

    @property
    def support(self):
        return (0.0, INF)

    @property
    def center(self):
        return 1.0 / self.lam

    @property
    def scale(self):
        return 1.0 / self.lam

    @property
    def mean(self):
        return 1.0 / self.lam

    @property
    def variance(self):
        return 1.0 / self.lam ** 2

    def logpdf1(self, x):
        return math.log(self.lam) - self.lam * x if x >= 0 else -INF

    def pdf1(self, x):
        return self.lam * math.exp(-self.lam * x) if x >= 0 else 0.0

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, math.log(self.lam) - self.lam * x, -INF)

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def cdf1(self, x):
        return -math.expm1(-self.lam * x) if x > 0 else 0.0

    def sample(self, n, seed):
        return self.rng(seed).exponential(1.0 / self.lam, n)

    def shannon_entropy(self):
        return 1.0 - math.log(self.lam)

    @property
    def spec(self):
        return f"exp:lambda={_f(self.lam)}"


@dataclass(frozen=True)
class Uniform(Dist):
    a: float = 0.0
    b: float = 1.0
    family = "uniform"

    def __post_init__(self):
        _need(math.isfinite(self.a) and math.isfinite(self.b) and self.b > self.a,
              "b", f"b > a = {self.a!r}", self.b)

    @property
    def L(self):
        return self.b - self.a

    @property
    def support(self):
        return (self.a, self.b)

    @property
    def center(self):
        return 0.5 * (self.a + self.b)

    @property
    def scale(self):
        return self.L

    @property
    def mean(self):
        return self.center

    @property
    def variance(self):
        return self.L ** 2 / 12

    def pdf1(self, x):
        return 1.0 / self.L if self.a <= x <= self.b else 0.0

    def logpdf1(self, x):
        return -math.log(self.L) if self.a <= x <= self.b else -INF

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.a) & (x <= self.b), 1.0 / self.L, 0.0)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.a) & (x <= self.b), -math.log(self.L), -INF)

    def cdf1(self, x):
        return min(max((x - self.a) / self.L, 0.0), 1.0)

    def sample(self, n, seed):
        return self.rng(seed).uniform(self.a, self.b, n)

    def shannon_entropy(self):
        return math.log(self.L)

    @property
    def spec(self):
        return f"uniform:a={_f(self.a)},b={_f(self.b)}"


@dataclass(frozen=True)
class Cauchy(Dist):
    mu: float = 0.0
    theta: float = 1.0
    family = "cauchy"

    def __post_init__(self):
        _need(self.theta > 0 and math.isfinite(self.theta), "theta", "theta > 0", self.theta)
        _need(math.isfinite(self.mu), "mu", "finite mu", self.mu)

    @property
    def support(self):
        return (-INF, INF)

    @property
    def center(self):
        return self.mu

    @property
    def scale(self):
        return self.theta

    @property
    def mean(self):
        return math.nan

    @property
    def variance(self):
        return INF

    def logpdf1(self, x):
        z = (x - self.mu) / self.theta
        return -math.log(math.pi * self.theta) - math.log1p(z * z)

    def pdf1(self, x):
        z = (x - self.mu) / self.theta
        return 1.0 / (math.pi * self.theta * (1.0 + z * z))

    def logpdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mu) / self.theta
        return -math.log(math.pi * self.theta) - np.log1p(z * z)

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def cdf1(self, x):
        return 0.5 + math.atan((x - self.mu) / self.theta) / math.pi

    def sample(self, n, seed):
        return self.mu + self.theta * self.rng(seed).standard_cauchy(n)

    def shannon_entropy(self):
        return math.log(4 * math.pi * self.theta)

    @property
    def spec(self):
        return f"cauchy:mu={_f(self.mu)},theta={_f(self.theta)}"


LOGHEAVY_NORM = 2.0 / math.pi


def logheavy_raw_g(x: float) -> float:
    """1/(x (ln^2 x + 1)) on (1, inf); total mass pi/2, see LogHeavy."""
    if x <= 1:
        return 0.0
    l = math.log(x)
    return 1.0 / (x * (l * l + 1.0))


@dataclass(frozen=True)
class LogHeavy(Dist):
    """Density (2/pi) / (x (ln^2 x + 1)) on (1, inf).

    The unnormalised profile has mass pi/2 (u = ln x turns it into
    1/(1+u^2) on (0, inf)).  Its Shannon entropy is +inf.
    """

    family = "logheavy"
    log_domain = True

    @property
    def support(self):
        return (1.0, INF)

    @property
    def center(self):
        return math.e

    @property
    def scale(self):
        return math.e

    @property
    def mean(self):
        return INF

    @property
    def variance(self):
        return INF

    def pdf1(self, x):
        return LOGHEAVY_NORM * logheavy_raw_g(x)

    def logpdf1(self, x):
        if x <= 1:
            return -INF
        l = math.log(x)
        return math.log(LOGHEAVY_NORM) - l - math.log1p(l * l)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            l = np.log(x)
            out = math.log(LOGHEAVY_NORM) - l - np.log1p(l * l)
        return np.where(x > 1, out, -INF)

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def logpdf_u(self, u):
        return math.log(LOGHEAVY_NORM) - math.log1p(u * u) if u > 0 else -INF

    def cdf1(self, x):
        return LOGHEAVY_NORM * math.atan(math.log(x)) if x > 1 else 0.0

    def sample(self, n, seed):
        """Inverse-CDF draws; about 9e-4 of the mass lies beyond the float range and comes back as inf."""
        u = self.rng(seed).random(n)
        with np.errstate(over="ignore"):
            return np.exp(np.tan(0.5 * math.pi * u))

    def shannon_entropy(self):
        return INF

    @property
    def spec(self):
        return "logheavy"


# ------------------------------------------------------------------ sums with closed forms

@dataclass(frozen=True)
class Trapezoid(Dist):
    """U(a1, b1) + U(a2, b2): piecewise linear with plateau 1/max(L1, L2)."""

    a1: float
    b1: float
    a2: float
    b2: float
    family = "trapezoid"
    conv = TRAPEZOID

    @property
    def L1(self):
        return self.b1 - self.a1

    @property
    def L2(self):
        return self.b2 - self.a2

    @property
    def corners(self):
        A = self.a1 + self.a2
        lo, hi = sorted((self.L1, self.L2))
        return A, A + lo, A + hi, self.b1 + self.b2

    @property
    def breakpoints(self):
        return tuple(sorted(set(self.corners)))

    @property
    def support(self):
        A, _, _, B = self.corners
        return (A, B)

    @property
    def center(self):
        return 0.5 * sum(self.support)

    @property
    def scale(self):
        return self.support[1] - self.support[0]

    @property
    def mean(self):
        return self.center

    @property
    def variance(self):
        return (self.L1 ** 2 + self.L2 ** 2) / 12

    def pdf1(self, x):
        A, C1, C2, B = self.corners
        prod = self.L1 * self.L2
        if x <= A or x >= B:
            return 0.0
        if x < C1:
            return (x - A) / prod
        if x <= C2:
            return 1.0 / max(self.L1, self.L2)
        return (B - x) / prod

    def logpdf1(self, x):
        p = self.pdf1(x)
        return math.log(p) if p > 0 else -INF

    def pdf(self, x):
        A, C1, C2, B = self.corners
        x = np.asarray(x, dtype=float)
        prod = self.L1 * self.L2
        up = np.clip((x - A) / prod, 0.0, None)
        down = np.clip((B - x) / prod, 0.0, None)
        return np.minimum(np.minimum(up, down), 1.0 / max(self.L1, self.L2))

    def logpdf(self, x):
        with np.errstate(divide="ignore"):
            return np.log(self.pdf(x))

    def cdf1(self, x):
        return integrate(self.pdf1, self.support[0], min(max(x, self.support[0]), self.support[1]),
                         1e-12, points=self.breakpoints).value

    def sample(self, n, seed):
        r1, r2 = np.random.SeedSequence(seed).spawn(2)
        return (Uniform(self.a1, self.b1).sample(n, r1)
                + Uniform(self.a2, self.b2).sample(n, r2))

    def shannon_entropy(self):
        lo, hi = sorted((self.L1, self.L2))
        return math.log(hi) + lo / (2 * hi)

    @property
    def spec(self):
        return f"sum:{Uniform(self.a1, self.b1).spec}+{Uniform(self.a2, self.b2).spec}"


@dataclass(frozen=True)
class ExpMixture(Dist):
    """Exp(l1) + Exp(l2), l1 != l2."""

    l1: float
    l2: float
    family = "expmix"
    conv = MIXTURE

    def __post_init__(self):
        _need(self.l1 != self.l2, "lambda", "distinct rates (equal rates give Gamma(2, lambda))",
              self.l1)

    @property
    def _hi_lo(self):
        return max(self.l1, self.l2), min(self.l1, self.l2)

    @property
    def support(self):
        return (0.0, INF)

    @property
    def center(self):
        return 1 / self.l1 + 1 / self.l2

    @property
    def scale(self):
        return self.center

    @property
    def mean(self):
        return self.center

    @property
    def variance(self):
        return 1 / self.l1 ** 2 + 1 / self.l2 ** 2

    def logpdf1(self, x):
        if x <= 0:
            return -INF
        hi, lo = self._hi_lo
        return math.log(hi * lo / (hi - lo)) - lo * x + math.log(-math.expm1(-(hi - lo) * x))

    def pdf1(self, x):
        if x <= 0:
            return 0.0
        hi, lo = self._hi_lo
        return hi * lo / (hi - lo) * (math.exp(-lo * x) - math.exp(-hi * x))

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        hi, lo = self._hi_lo
        with np.errstate(divide="ignore", invalid="ignore"):
            out = math.log(hi * lo / (hi - lo)) - lo * x + np.log(-np.expm1(-(hi - lo) * x))
        return np.where(x > 0, out, -INF)

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def cdf1(self, x):
        if x <= 0:
            return 0.0
        hi, lo = self._hi_lo
        return 1.0 - (hi * math.exp(-lo * x) - lo * math.exp(-hi * x)) / (hi - lo)

    def sample(self, n, seed):
        r1, r2 = np.random.SeedSequence(seed).spawn(2)
        return Exponential(self.l1).sample(n, r1) + Exponential(self.l2).sample(n, r2)

    @property
    def spec(self):
        return f"sum:{Exponential(self.l1).spec}+{Exponential(self.l2).spec}"


@dataclass(frozen=True)
class GammaUniformSum(Dist):
    """Gamma(beta, lam) + U(a, b):  f(t) = [F(t - a) - F(t - b)] / L."""

    g: Gamma
    a: float
    b: float
    family = "gamma+uniform"
    conv = MIXTURE

    def __post_init__(self):
        _need(self.b > self.a, "b", f"b > a = {self.a!r}", self.b)

    @property
    def L(self):
        return self.b - self.a

    @property
    def breakpoints(self):
        return (self.a, self.b)

    @property
    def rough_points(self):
        return (self.a, self.b)

    @property
    def support(self):
        return (self.a, INF)

    @property
    def center(self):
        return self.g.mean + 0.5 * (self.a + self.b)

    @property
    def scale(self):
        return max(self.g.scale, self.L)

    @property
    def mean(self):
        return self.center

    @property
    def variance(self):
        return self.g.variance + self.L ** 2 / 12

    def logpdf1(self, t):
        if t <= self.a:
            return -INF
        g = self.g
        if t <= self.b or g.lam * (t - self.b) < g.beta:
            d = g.cdf1(t - self.a) - g.cdf1(t - self.b)
            return math.log(d) - math.log(self.L) if d > 0 else -INF
        # both arguments in the upper tail: use survival functions
        s_b, s_a = g.sf1(t - self.b), g.sf1(t - self.a)
        if s_b <= 0:
            return -INF
        return math.log(s_b) + math.log1p(-s_a / s_b) - math.log(self.L)

    def pdf1(self, t):
        lp = self.logpdf1(t)
        return 0.0 if lp == -INF else math.exp(lp)

    def logpdf(self, t):
        t = np.asarray(t, dtype=float)
        g = self.g
        lo = np.clip(t - self.b, 0.0, None)
        hi = np.clip(t - self.a, 0.0, None)
        lower = special.gammainc(g.beta, g.lam * hi) - special.gammainc(g.beta, g.lam * lo)
        upper = special.gammaincc(g.beta, g.lam * lo) - special.gammaincc(g.beta, g.lam * hi)
        d = np.where(g.lam * lo < g.beta, lower, upper)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.log(d) - math.log(self.L)
        return np.where((t > self.a) & (d > 0), out, -INF)

    def pdf(self, t):
        return np.exp(self.logpdf(t))

    def sample(self, n, seed):
        r1, r2 = np.random.SeedSequence(seed).spawn(2)
        return self.g.sample(n, r1) + Uniform(self.a, self.b).sample(n, r2)

    @property
    def bounded_density(self):
        return True

    @property
    def spec(self):
        return f"sum:{self.g.spec}+{Uniform(self.a, self.b).spec}"


@dataclass(frozen=True)
class Scaled(Dist):
    """c * base for c > 0."""

    base: Dist
    c: float
    family = "scaled"

    def __post_init__(self):
        _need(self.c > 0 and math.isfinite(self.c), "c", "c > 0", self.c)

    @property
    def conv(self):
        return self.base.conv

    @property
    def log_domain(self):
        return self.base.log_domain

    @property
    def support(self):
        lo, hi = self.base.support
        return (lo * self.c, hi * self.c)

    @property
    def breakpoints(self):
        return tuple(p * self.c for p in self.base.breakpoints)

    @property
    def rough_points(self):
        return tuple(p * self.c for p in self.base.rough_points)

    @property
    def center(self):
        return self.base.center * self.c

    @property
    def scale(self):
        return self.base.scale * self.c

    @property
    def mean(self):
        return self.base.mean * self.c

    @property
    def variance(self):
        return self.base.variance * self.c ** 2

    def pdf1(self, x):
        return self.base.pdf1(x / self.c) / self.c

    def logpdf_u(self, u):
        return self.base.logpdf_u(u - math.log(self.c))

    def logpdf1(self, x):
        return self.base.logpdf1(x / self.c) - math.log(self.c)

    def pdf(self, x):
        return self.base.pdf(np.asarray(x, dtype=float) / self.c) / self.c

    def logpdf(self, x):
        return self.base.logpdf(np.asarray(x, dtype=float) / self.c) - math.log(self.c)

    def sample(self, n, seed):
        return self.c * self.base.sample(n, seed)

    def shannon_entropy(self):
        h = self.base.shannon_entropy()
        return None if h is None else h + math.log(self.c)

    @property
    def bounded_density(self):
        return self.base.bounded_density

    @property
    def spec(self):
        return f"scaled({self.base.spec},{_f(self.c)})"


@dataclass(frozen=True)
class NumericSum(Dist):
    """d1 + d2 with the density evaluated by adaptive quadrature of the
    convolution integral.  Values are memoised per instance (per process)."""

    d1: Dist
    d2: Dist
    tol: float = 1e-10
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)
    _lock: object = field(default_factory=threading.Lock, compare=False, repr=False, hash=False)
    family = "sum"
    conv = NUMERIC

    @property
    def log_domain(self):
        return self.d1.log_domain or self.d2.log_domain

    @property
    def support(self):
        return (self.d1.support[0] + self.d2.support[0], self.d1.support[1] + self.d2.support[1])

    @property
    def breakpoints(self):
        pts = {p + q for p in self.d1.breakpoints + self.d1.support
               for q in self.d2.breakpoints + self.d2.support}
        return tuple(sorted(p for p in pts if math.isfinite(p)))

    @property
    def center(self):
        return self.d1.center + self.d2.center

    @property
    def scale(self):
        return math.hypot(self.d1.scale, self.d2.scale)

    @property
    def mean(self):
        return self.d1.mean + self.d2.mean

    @property
    def variance(self):
        return self.d1.variance + self.d2.variance

    def _conv(self, t: float) -> float:
        # integrate over s, the value of the second summand
        lo = max(self.d2.support[0], t - self.d1.support[1])
        hi = min(self.d2.support[1], t - self.d1.support[0])
        if not lo < hi:
            return 0.0
        pts = [p for p in self.d2.breakpoints] + [t - p for p in self.d1.breakpoints]
        f1, f2 = self.d1.pdf1, self.d2.pdf1

        def k(s):
            return f1(t - s) * f2(s)

        if self.d2.log_domain and lo > 0:
            def ku(u):
                s = math.exp(u)
                return k(s) * s
            est = integrate(ku, math.log(lo), math.log(hi) if hi < INF else INF, self.tol)
        else:
            est = integrate(k, lo, hi, self.tol, points=pts,
                            center=min(max(self.d2.center, lo), hi) if hi < INF or lo > -INF
                            else self.d2.center,
                            scale=min(self.d1.scale, self.d2.scale))
        return max(est.value, 0.0)

    def pdf1(self, t):
        t = float(t)
        v = self._cache.get(t)
        if v is None:
            v = self._conv(t)
            with self._lock:
                self._cache[t] = v
        return v

    def logpdf1(self, t):
        p = self.pdf1(t)
        return math.log(p) if p > 0 else -INF

    def sample(self, n, seed):
        r1, r2 = np.random.SeedSequence(seed).spawn(2)
        return self.d1.sample(n, r1) + self.d2.sample(n, r2)

    @property
    def bounded_density(self):
        return self.d1.bounded_density or self.d2.bounded_density

    @property
    def spec(self):
        return f"sum:{self.d1.spec}+{self.d2.spec}"

    def __getstate__(self):
        return {"d1": self.d1, "d2": self.d2, "tol": self.tol}

    def __setstate__(self, state):
        object.__setattr__(self, "d1", state["d1"])
        object.__setattr__(self, "d2", state["d2"])
        object.__setattr__(self, "tol", state["tol"])
        object.__setattr__(self, "_cache", {})
        object.__setattr__(self, "_lock", threading.Lock())


# ------------------------------------------------------------------ operations

def convolve(d1: Dist, d2: Dist) -> Dist:
    """Distribution of d1 + d2 for independent summands."""
    if isinstance(d1, Normal) and isinstance(d2, Normal):
        return Normal(d1.mu + d2.mu, math.hypot(d1.sigma, d2.sigma))
    if isinstance(d1, Cauchy) and isinstance(d2, Cauchy):
        return Cauchy(d1.mu + d2.mu, d1.theta + d2.theta)
    g1, g2 = _as_gamma(d1), _as_gamma(d2)
    if g1 is not None and g2 is not None and g1.lam == g2.lam:
        return Gamma(g1.beta + g2.beta, g1.lam)
    if isinstance(d1, Exponential) and isinstance(d2, Exponential):
        return ExpMixture(d1.lam, d2.lam)
    if isinstance(d1, Uniform) and isinstance(d2, Uniform):
        return Trapezoid(d1.a, d1.b, d2.a, d2.b)
    if g1 is not None and isinstance(d2, Uniform) and d2.a >= 0:
        return GammaUniformSum(g1, d2.a, d2.b)
    if g2 is not None and isinstance(d1, Uniform) and d1.a >= 0:
        return GammaUniformSum(g2, d1.a, d1.b)
    return NumericSum(d1, d2)


def _as_gamma(d):
    if isinstance(d, Gamma):
        return d
    if isinstance(d, Exponential):
        return Gamma(1.0, d.lam)
    return None


def scale(d: Dist, c: float) -> Dist:
    """Distribution of c * X (c > 0), staying in the family when it is closed under scaling."""
    c = float(c)
    _need(c > 0 and math.isfinite(c), "c", "c > 0", c)
    if c == 1.0:
        return d
    if isinstance(d, Normal):
        return Normal(d.mu * c, d.sigma * c)
    if isinstance(d, Gamma):
        return Gamma(d.beta, d.lam / c)
    if isinstance(d, Exponential):
        return Exponential(d.lam / c)
    if isinstance(d, Uniform):
        return Uniform(d.a * c, d.b * c)
    if isinstance(d, Cauchy):
        return Cauchy(d.mu * c, d.theta * c)
    if isinstance(d, Trapezoid):
        return Trapezoid(d.a1 * c, d.b1 * c, d.a2 * c, d.b2 * c)
    if isinstance(d, ExpMixture):
        return ExpMixture(d.l1 / c, d.l2 / c)
    if isinstance(d, Scaled):
        return scale(d.base, d.c * c)
    return Scaled(d, c)


def sample(d: Dist, n: int, seed: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be >= 1")
    return d.sample(n, seed)


_PARAMS = {
    "normal": (Normal, {"mu": 0.0, "sigma": 1.0}, {"mu": "mu", "sigma": "sigma"}),
    "gamma": (Gamma, {"beta": None, "lambda": 1.0}, {"beta": "beta", "lambda": "lam"}),
    "exp": (Exponential, {"lambda": 1.0}, {"lambda": "lam"}),
    "uniform": (Uniform, {"a": 0.0, "b": 1.0}, {"a": "a", "b": "b"}),
    "cauchy": (Cauchy, {"mu": 0.0, "theta": 1.0}, {"mu": "mu", "theta": "theta"}),
}
FAMILIES = tuple(_PARAMS) + ("logheavy", "sum")


def _parse_simple(spec: str) -> Dist:
    name, _, rest = spec.partition(":")
    name = name.strip()
    if name == "logheavy":
        if rest.strip():
            raise DistributionError("logheavy takes no parameters")
        return LogHeavy()
    if name not in _PARAMS:
        raise DistributionError(f"unknown family {name!r}; expected one of {', '.join(FAMILIES)}")
    cls, defaults, attrs = _PARAMS[name]
    values = dict(defaults)
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, val = item.partition("=")
        key = key.strip()
        if not eq or key not in defaults:
            raise DistributionError(f"{name}: unknown parameter {item!r}; "
                                    f"expected {', '.join(defaults)}")
        try:
            values[key] = float(val)
        except ValueError:
            raise DistributionError(f"{name}: parameter {key}={val!r} is not a number") from None
    missing = [k for k, v in values.items() if v is None]
    if missing:
        raise DistributionError(f"{name}: missing parameter {', '.join(missing)}")
    return cls(**{attrs[k]: v for k, v in values.items()})


def make_dist(spec: str, check: bool = True) -> Dist:
    """Build a distribution from ``family:key=value,...`` or ``sum:<spec>+<spec>``."""
    spec = spec.strip()
    if spec.startswith("sum:"):
        parts = re.split(r"\+(?=\s*[a-z])", spec[4:])
        if len(parts) != 2:
            raise DistributionError(f"sum needs exactly two summands: {spec!r}")
        d = convolve(_parse_simple(parts[0]), _parse_simple(parts[1]))
    else:
        d = _parse_simple(spec)
    if check and not isinstance(d, NumericSum):
        d.self_test()
    return d
