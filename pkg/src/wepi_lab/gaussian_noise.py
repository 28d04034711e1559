"""Joint (Z, V) integrals for V = sqrt(gamma) Z + N with N ~ N(0, 1).

Every channel functional is a double integral against the joint density
f_Z(x) phi(y - sqrt(gamma) x).  The outer y-integral uses the trapezoid
rule on a uniform grid; all y-integrands are convolutions with a unit
Gaussian, hence smooth, and the rule converges geometrically in the step.
For each y the inner x-integral uses composite Gauss-Legendre panels on
the window where the kernel is not negligible, with the density's break
points inserted as panel edges.  Weights are handled in log space and
normalised row by row.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import distributions as D
from .numerics import CONVERGED, NOT_INTEGRABLE, SLOW, Estimate, integrate, panel_rule
from .weights import WeightFn, WeightFn2D

LN_SQRT_2PI = 0.5 * math.log(2 * math.pi)

DEFAULT_STEP = 0.25
DEFAULT_PANELS = 20
DEFAULT_ORDER = 10
KERNEL_WIDTH = 12.0
LOG_DROP = 50.0
GRADING_LEVELS = 14


class ChannelInputError(ValueError):
    pass


def check_signal(z: D.Dist) -> None:
    if not math.isfinite(z.variance):
        raise ChannelInputError(f"{z.spec}: the signal needs a finite variance")
    if not z.bounded_density:
        raise ChannelInputError(f"{z.spec}: the signal needs a bounded density")


def effective_support(z: D.Dist) -> tuple[float, float]:
    """Support clipped where the log-density has fallen LOG_DROP nats below its peak."""
    lo, hi = z.support
    c, s = z.center, z.scale
    probes = [c + k * s for k in (-1.0, -0.5, 0.0, 0.5, 1.0)]
    ref = max(z.logpdf1(p) for p in probes if lo < p < hi) if any(lo < p < hi for p in probes) \
        else z.logpdf1(c)

    def walk(direction):
        r = s
        while r < 1e6 * s:
            x = c + direction * r
            if z.logpdf1(x) < ref - LOG_DROP:
                return x
            r *= 1.25
        raise ChannelInputError(f"{z.spec}: tail too heavy for the channel grid")

    return (lo if math.isfinite(lo) else walk(-1.0), hi if math.isfinite(hi) else walk(1.0))


@dataclass(frozen=True)
class Frame:
    """Quadrature nodes shared by several gamma values (finite differences in gamma)."""

    y: np.ndarray        # (Ny,)
    hy: float
    x: np.ndarray        # (Ny, Nx)
    wx: np.ndarray       # (Ny, Nx)


def make_frame(z: D.Dist, gamma: float, step: float = DEFAULT_STEP, panels: int = DEFAULT_PANELS,
               order: int = DEFAULT_ORDER, pad: float = 0.0) -> Frame:
    zlo, zhi = effective_support(z)
    s = math.sqrt(gamma)
    W = KERNEL_WIDTH + pad
    ylo, yhi = s * zlo - W, s * zhi + W
    ny = int(math.ceil((yhi - ylo) / step)) + 1
    y = ylo + step * np.arange(ny)
    if s > 0:
        a = np.maximum(zlo, (y - W) / s)
        b = np.minimum(zhi, (y + W) / s)
    else:
        a = np.full(ny, zlo)
        b = np.full(ny, zhi)
    keep = a < b
    y, a, b = y[keep], a[keep], b[keep]
    t = np.linspace(0.0, 1.0, panels + 1)
    edges = a[:, None] + (b - a)[:, None] * t
    bps = [p for p in z.breakpoints if zlo < p < zhi]
    # geometric grading towards points where the density is not smooth
    w0 = (zhi - zlo) / panels
    for p in z.rough_points:
        for k in range(1, GRADING_LEVELS + 1):
            for q in (p - w0 * 0.3 ** k, p + w0 * 0.3 ** k):
                if zlo < q < zhi:
                    bps.append(q)
    if bps:
        extra = np.clip(np.array(bps)[None, :], a[:, None], b[:, None])
        edges = np.sort(np.concatenate([edges, extra], axis=1), axis=1)
    x, wx = panel_rule(edges, order)
    return Frame(y, step, x, wx)


class NoiseGrid:
    """Posterior weights of Z given V = y on a (y, x) node set."""

    def __init__(self, z: D.Dist, gamma: float, frame: Frame | None = None, **frame_kw):
        if gamma < 0:
            raise ValueError("gamma must be >= 0")
        check_signal(z)
        self.z = z
        self.gamma = float(gamma)
        self.s = math.sqrt(gamma)
        self.frame = frame if frame is not None else make_frame(z, gamma, **frame_kw)
        f = self.frame
        self.y = f.y
        self.X = f.x
        self.Y = f.y[:, None]
        self.N = self.Y - self.s * self.X
        with np.errstate(divide="ignore", invalid="ignore"):
            logf = z.logpdf(self.X)
            logk = -0.5 * self.N ** 2 - LN_SQRT_2PI
            logw = logf + logk + np.log(f.wx)
        logw = np.where(np.isfinite(logw), logw, -np.inf)
        m = logw.max(axis=1)
        live = np.isfinite(m)
        m = np.where(live, m, 0.0)
        P = np.exp(logw - m[:, None])
        tot = P.sum(axis=1)
        live &= tot > 0
        self.live = live
        self.logf = np.where(np.isfinite(logf), logf, 0.0)
        self.logk = logk
        self.P = P
        self.q = np.where(live[:, None], P / np.where(tot > 0, tot, 1.0)[:, None], 0.0)
        with np.errstate(divide="ignore"):
            self.logfV = np.where(live, m + np.log(np.where(tot > 0, tot, 1.0)), -np.inf)
        self.fV = np.where(live, np.exp(self.logfV), 0.0)
        self.hy = f.hy

    # -- helpers
    def _y_integral(self, vals: np.ndarray) -> float:
        return float(self.hy * np.sum(np.where(self.live, vals, 0.0)))

    @property
    def mass_defect(self) -> float:
        return abs(self._y_integral(self.fV) - 1.0)

    def _estimate(self, value: float, scale: float = 1.0) -> Estimate:
        err = self.mass_defect * max(1.0, abs(scale), abs(value)) + 1e-12 * max(1.0, abs(value))
        status = CONVERGED if self.mass_defect < 1e-8 else SLOW
        diag = "" if status == CONVERGED else f"grid mass defect {self.mass_defect:.2e}"
        return Estimate(value, err, status, diag)

    def post_mean(self) -> np.ndarray:
        return np.sum(self.q * self.X, axis=1)

    def post_var(self) -> np.ndarray:
        m = self.post_mean()
        return np.sum(self.q * (self.X - m[:, None]) ** 2, axis=1)

    def score(self) -> np.ndarray:
        """E[N | V = y] = -f_V'(y) / f_V(y)."""
        return np.sum(self.q * self.N, axis=1)

    def eta(self) -> np.ndarray:
        """E[N Z | V = y]."""
        return np.sum(self.q * self.N * self.X, axis=1)

    # -- functionals
    def mmse(self) -> Estimate:
        return self._estimate(self._y_integral(self.fV * self.post_var()), self.z.variance)

    def fisher(self) -> Estimate:
        """J(V) = E[(E[N | V])^2]."""
        return self._estimate(self._y_integral(self.fV * self.score() ** 2))

    def _rho(self, rho: WeightFn2D) -> np.ndarray:
        return rho.vec(self.X, np.broadcast_to(self.Y, self.X.shape))

    def e_rho(self, rho: WeightFn2D) -> Estimate:
        R = self._rho(rho)
        return self._estimate(self._y_integral(self.fV * np.sum(self.q * R, axis=1)))

    def j_rho(self, rho: WeightFn2D) -> np.ndarray:
        """int rho(x, y) phi(y - s x) f(x) dx on the y-grid."""
        return self.fV * np.sum(self.q * self._rho(rho), axis=1)

    def weighted_output_entropy(self, rho: WeightFn2D) -> Estimate:
        """H = -int J_rho(y) ln f_V(y) dy (the rho-weighted entropy of V)."""
        J = self.j_rho(rho)
        return self._estimate(self._y_integral(-J * np.where(self.live, self.logfV, 0.0)),
                              np.max(np.abs(self.logfV[self.live])))

    def conditional_entropy(self, rho: WeightFn2D) -> Estimate:
        R = self._rho(rho)
        inner = np.sum(self.q * R * (self.logf + self.logk), axis=1)
        inner -= np.sum(self.q * R, axis=1) * np.where(self.live, self.logfV, 0.0)
        return self._estimate(-self._y_integral(self.fV * inner))

    def mutual_entropy(self, rho: WeightFn2D) -> Estimate:
        R = self._rho(rho)
        inner = np.sum(self.q * R * self.logk, axis=1)
        inner -= np.sum(self.q * R, axis=1) * np.where(self.live, self.logfV, 0.0)
        return self._estimate(self._y_integral(self.fV * inner))

    def zeta_nodes(self, rho: WeightFn2D) -> np.ndarray:
        """zeta(x, y) at every node (see ``zeta_value``)."""
        if rho.y_free:
            return -self.X * rho.limit.vec(self.X)
        return _zeta_general(rho, self.X, self.Y, self.s)

    def boundary_mass(self, rho: WeightFn2D) -> Estimate:
        """G(inf) = int int rho (y - s x) x phi f dx dy; the zeta form needs it to vanish."""
        R = self._rho(rho)
        g = self.fV * np.sum(self.q * R * self.N * self.X, axis=1)
        return self._estimate(self._y_integral(g))

    def derivative_terms(self, rho: WeightFn2D) -> tuple[Estimate, Estimate]:
        """(E[zeta(Z, V) S(V)], E[rho(Z, V) eta(V)]) with S = E[N | V], eta = E[N Z | V]."""
        R = self._rho(rho)
        zeta = self.zeta_nodes(rho)
        S, H = self.score(), self.eta()
        t1 = self._y_integral(self.fV * np.sum(self.q * zeta, axis=1) * S)
        t2 = self._y_integral(self.fV * np.sum(self.q * R, axis=1) * H)
        return self._estimate(t1), self._estimate(t2)

    def derivative_terms_printed(self, rho: WeightFn2D) -> tuple[Estimate, Estimate]:
        """(E[zeta xi], E[rho eta]) with xi(y) = y E[N | V = y]."""
        R = self._rho(rho)
        zeta = self.zeta_nodes(rho)
        xi = self.y * self.score()
        t1 = self._y_integral(self.fV * np.sum(self.q * zeta, axis=1) * xi)
        t2 = self._y_integral(self.fV * np.sum(self.q * R, axis=1) * self.eta())
        return self._estimate(t1), self._estimate(t2)


_GL48 = np.polynomial.legendre.leggauss(48)


def _zeta_general(rho: WeightFn2D, X, Y, s) -> np.ndarray:
    """x * [int_{-inf}^{n} rho(x, s x + t) t phi(t) dt] / phi(n), n = y - s x.

    For n < 0 the lower tail is integrated directly; for n >= 0 the complement
    of the upper tail is used, int_{-inf}^{inf} minus int_n^{inf}, so that no
    large terms cancel in the ratio.
    """
    n = Y - s * X
    t0, w0 = _GL48
    # upper/lower tail over a window of 14 noise units from n, in ratio form
    u = (t0 + 1.0) * 7.0                          # [0, 14]
    wu = w0 * 7.0
    out = np.empty(np.broadcast(X, n).shape)
    neg = n < 0
    X_, n_ = np.broadcast_to(X, out.shape), np.broadcast_to(n, out.shape)
    for mask, sign in ((neg, -1.0), (~neg, 1.0)):
        if not mask.any():
            continue
        xm, nm = X_[mask][:, None], n_[mask][:, None]
        t = nm + sign * u                         # moving away from n into the tail
        ratio = np.exp(0.5 * (nm ** 2 - t ** 2))  # phi(t) / phi(n)
        vals = rho.vec(xm, s * xm + t) * t * ratio
        tail = np.sum(vals * wu, axis=1)
        if sign < 0:
            out[mask] = xm[:, 0] * tail
        else:
            full = _full_moment(rho, xm[:, 0], s)
            with np.errstate(over="ignore"):
                scale = np.exp(0.5 * nm[:, 0] ** 2) * math.sqrt(2 * math.pi)
            out[mask] = xm[:, 0] * (full * scale - tail)
    return out


_GH = np.polynomial.hermite_e.hermegauss(80)


def _full_moment(rho: WeightFn2D, x: np.ndarray, s: float) -> np.ndarray:
    """int rho(x, s x + t) t phi(t) dt (probabilists' Gauss-Hermite)."""
    t, w = _GH
    w = w / math.sqrt(2 * math.pi)
    vals = rho.vec(x[:, None], s * x[:, None] + t[None, :]) * t[None, :]
    return np.sum(vals * w, axis=1)


def zeta_value(rho: WeightFn2D, z: D.Dist, x: float, y: float, gamma: float,
               tol: float = 1e-11) -> Estimate:
    """zeta_Z(x, y, gamma) by adaptive quadrature in v."""
    s = math.sqrt(gamma)
    if z.pdf1(x) <= 0:
        return Estimate(math.nan, math.inf, NOT_INTEGRABLE, f"joint density is zero at x={x!r}")
    n = y - s * x
    den = math.exp(-0.5 * n * n - LN_SQRT_2PI)
    if den == 0.0:
        return Estimate(math.nan, math.inf, NOT_INTEGRABLE, f"kernel underflow at n={n!r}")

    if n < 0:
        def k(v):
            m = v - s * x
            return rho(x, v) * m * x * math.exp(-0.5 * m * m - LN_SQRT_2PI)

        num = integrate(k, -math.inf, y, tol, center=min(s * x, y), scale=1.0)
        return Estimate(num.value / den, num.error / den, num.status, num.diagnostic)

    # complement of the upper tail, with phi(t) / phi(n) formed before integrating
    def upper(t):
        return rho(x, s * x + t) * t * math.exp(0.5 * (n * n - t * t))

    tail = integrate(upper, n, math.inf, tol, center=n, scale=1.0)
    if rho.y_free:
        full = Estimate(0.0, 0.0)  # rho(x, .) is constant and the full first moment vanishes
    else:
        def k_full(t):
            return rho(x, s * x + t) * t * math.exp(-0.5 * t * t - LN_SQRT_2PI)

        full = integrate(k_full, -math.inf, math.inf, tol).scaled(1.0 / den)
    return (full - tail).scaled(x)


def xi_eta_value(z: D.Dist, y: float, gamma: float, tol: float = 1e-11) -> tuple[Estimate, Estimate]:
    """xi(y) = y E[N | V = y] and eta(y) = E[N Z | V = y] by quadrature over t."""
    s = math.sqrt(gamma)
    lo, hi = z.support
    c = y / s if s > 0 else z.center
    c = min(max(c, lo), hi) if math.isfinite(lo) or math.isfinite(hi) else c
    sc = min(z.scale, 1.0 / s) if s > 0 else z.scale

    def ker(t):
        n = y - t * s
        lf = z.logpdf1(t)
        return 0.0 if lf == -math.inf else math.exp(lf - 0.5 * n * n - LN_SQRT_2PI)

    den = integrate(ker, lo, hi, tol, points=z.breakpoints, center=c, scale=sc)
    if not den.value > 1e-300:
        bad = Estimate(math.nan, math.inf, NOT_INTEGRABLE, f"f_V({y!r}) underflows")
        return bad, bad
    nxi = integrate(lambda t: (y - t * s) * y * ker(t), lo, hi, tol, points=z.breakpoints,
                    center=c, scale=sc)
    neta = integrate(lambda t: (y - t * s) * t * ker(t), lo, hi, tol, points=z.breakpoints,
                     center=c, scale=sc)

    def r(num):
        v = num.value / den.value
        return Estimate(v, (num.error + abs(v) * den.error) / den.value,
                        num.status if num.status != CONVERGED else den.status,
                        num.diagnostic or den.diagnostic)

    return r(nxi), r(neta)


def psi_weight(rho: WeightFn2D, gamma: float, tol: float = 1e-12) -> WeightFn:
    """psi(x) = int rho(x, y) phi(y - sqrt(gamma) x) dy as a weight on Z."""
    if rho.y_free:
        return rho.limit
    s = math.sqrt(gamma)

    def raw(x):
        return integrate(lambda n: rho(x, s * x + n) * math.exp(-0.5 * n * n - LN_SQRT_2PI),
                         -math.inf, math.inf, tol).value

    return WeightFn(f"psi[{rho.source}, gamma={gamma!r}]", raw=raw,
                    raw_vec=np.vectorize(raw, otypes=[float]))


def rho_star_weight(rho: WeightFn2D, z: D.Dist, tol: float = 1e-12) -> WeightFn:
    """rho*(y) = int rho(x, y) f_Z(x) dx as a weight on the noise."""
    def raw(y):
        return z.expect(lambda x, lf: rho(x, y), tol).value

    return WeightFn(f"rho*[{rho.source}]", raw=raw, raw_vec=np.vectorize(raw, otypes=[float]))


def rho_bar_weight(rho: WeightFn2D) -> WeightFn:
    """x -> lim rho(x, y) as y -> sign(x) * inf (the large-gamma weight)."""
    pos, neg = rho.limit, rho.limit_neg

    def raw(x):
        return pos.raw(x) if x > 0 else (neg.raw(x) if x < 0 else 0.5 * (pos.raw(x) + neg.raw(x)))

    return WeightFn(f"rhobar[{rho.source}]", raw=raw, raw_vec=np.vectorize(raw, otypes=[float]))
