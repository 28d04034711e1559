"""Quadrature, nested 2-D integration and a seeded Monte-Carlo oracle.

One-dimensional integrals go through QUADPACK (``scipy.integrate.quad``).
Unbounded domains are never handed to QUADPACK's infinite-interval rule
directly: a core window is integrated first and the tails are added in
pieces whose width doubles, so that a moment which does not exist shows
up as tail contributions that refuse to shrink.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as _spi

CONVERGED = "converged"
SLOW = "slow"
DIVERGENT = "divergent"
NOT_INTEGRABLE = "not-integrable"

DEFAULT_TOL = 1e-9
DEFAULT_TOL_2D = 1e-7

_MAX_DOUBLINGS = 90


class IntegrationError(ArithmeticError):
    """Raised by callers that need a converged estimate and did not get one."""

    def __init__(self, estimate: "Estimate", what: str = "integral"):
        super().__init__(f"{what}: {estimate.status} ({estimate.diagnostic})")
        self.estimate = estimate


@dataclass(frozen=True)
class Estimate:
    value: float
    error: float
    status: str = CONVERGED
    diagnostic: str = ""

    @property
    def ok(self) -> bool:
        return self.status == CONVERGED

    def require(self, what: str = "integral") -> "Estimate":
        if not self.ok:
            raise IntegrationError(self, what)
        return self

    def __add__(self, other):
        if isinstance(other, Estimate):
            return Estimate(self.value + other.value, self.error + other.error,
                            _worst(self.status, other.status),
                            _join(self.diagnostic, other.diagnostic))
        return Estimate(self.value + other, self.error, self.status, self.diagnostic)

    __radd__ = __add__

    def __neg__(self):
        return Estimate(-self.value, self.error, self.status, self.diagnostic)

    def __sub__(self, other):
        return self + (-other)

    def scaled(self, c: float) -> "Estimate":
        return Estimate(c * self.value, abs(c) * self.error, self.status, self.diagnostic)

    def __float__(self):
        return float(self.value)


_RANK = {CONVERGED: 0, SLOW: 1, NOT_INTEGRABLE: 2, DIVERGENT: 3}


def _worst(a: str, b: str) -> str:
    return a if _RANK[a] >= _RANK[b] else b


def _join(a: str, b: str) -> str:
    return "; ".join(s for s in (a, b) if s)


def ratio(num: Estimate, den: Estimate) -> Estimate:
    """num/den with first-order error propagation."""
    if den.value == 0:
        return Estimate(math.nan, math.inf, NOT_INTEGRABLE, "zero denominator")
    v = num.value / den.value
    err = num.error / abs(den.value) + abs(v) * den.error / abs(den.value)
    return Estimate(v, err, _worst(num.status, den.status), _join(num.diagnostic, den.diagnostic))


def _quad_piece(f, lo, hi, tol, points=None, limit=200):
    if hi <= lo:
        return 0.0, 0.0, True
    inner = None
    if points:
        inner = sorted(p for p in points if lo < p < hi)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if inner:
            val, err = _spi.quad(f, lo, hi, points=inner, epsabs=tol * 1e-3,
                                 epsrel=tol * 0.1, limit=limit)
        else:
            val, err = _spi.quad(f, lo, hi, epsabs=tol * 1e-3, epsrel=tol * 0.1, limit=limit)
    clean = not any(issubclass(w.category, _spi.IntegrationWarning) for w in caught)
    return val, err, clean


def _finite_integral(f, lo, hi, tol, points):
    val, err, clean = _quad_piece(f, lo, hi, tol, points)
    if not math.isfinite(val):
        return Estimate(val, math.inf, NOT_INTEGRABLE, f"non-finite value on [{lo:g}, {hi:g}]")
    status = CONVERGED if err <= tol * max(1.0, abs(val)) else SLOW
    diag = "" if clean and status == CONVERGED else f"quadpack err {err:.3g} on [{lo:g}, {hi:g}]"
    return Estimate(val, err, status, diag)


def _tail(f, start, direction, width, tol, points, core_value):
    """Sum pieces [r_k, r_{k+1}] (or mirrored) whose widths double."""
    total, err = 0.0, 0.0
    incs: list[float] = []
    r, w = start, width
    quiet = 0
    for _ in range(_MAX_DOUBLINGS):
        lo, hi = (r, r + w) if direction > 0 else (r - w, r)
        val, e, _clean = _quad_piece(f, lo, hi, tol, points)
        if not math.isfinite(val):
            return Estimate(total, math.inf, NOT_INTEGRABLE, f"non-finite tail piece at |x|~{abs(r):.3g}")
        total += val
        err += e
        incs.append(abs(val))
        scale = tol * max(1.0, abs(core_value + total))
        if abs(val) <= 0.01 * scale:
            quiet += 1
            if quiet >= 2:
                return Estimate(total, err + abs(val), CONVERGED)
        else:
            quiet = 0
        if len(incs) >= 6:
            last = incs[-6:]
            growing = all(last[i + 1] >= 0.95 * last[i] for i in range(5))
            if growing and all(v > scale for v in last[1:]):
                return Estimate(total, math.inf, DIVERGENT,
                                f"tail pieces not shrinking near |x|~{abs(r):.3g}: "
                                + ", ".join(f"{v:.3g}" for v in last))
        r = hi if direction > 0 else lo
        w *= 2.0
    return Estimate(total, err + incs[-1], SLOW,
                    f"tail still contributing {incs[-1]:.3g} at |x|~{abs(r):.3g}")


def integrate(f: Callable[[float], float], a: float, b: float, tol: float = DEFAULT_TOL,
              points: Sequence[float] = (), center: float | None = None,
              scale: float | None = None) -> Estimate:
    """Integrate a scalar function over [a, b]; either end may be infinite.

    ``center``/``scale`` locate the bulk of the integrand for unbounded
    domains (defaults 0 and 1).  ``points`` are interior break points
    (kinks, jumps) passed to the finite pieces.
    """
    if a > b:
        return -integrate(f, b, a, tol, points, center, scale)
    if a == b:
        return Estimate(0.0, 0.0)
    pts = [p for p in points if a < p < b and math.isfinite(p)]
    if math.isfinite(a) and math.isfinite(b):
        return _finite_integral(f, a, b, tol, pts)

    c = 0.0 if center is None else float(center)
    s = 1.0 if scale is None else float(scale)
    half = 16.0 * s
    lo = a if math.isfinite(a) else min(c - half, (min(pts) - s) if pts else c - half)
    hi = b if math.isfinite(b) else max(c + half, (max(pts) + s) if pts else c + half)
    if lo >= hi:
        # core window lies outside [a, b]
        if math.isfinite(a):
            hi = a + half
        else:
            lo = b - half
    core = _finite_integral(f, lo, hi, tol, pts)
    total = core
    if not math.isfinite(b):
        total = total + _tail(f, hi, +1, max(hi - c, s), tol, pts, core.value)
    if not math.isfinite(a):
        total = total + _tail(f, lo, -1, max(c - lo, s), tol, pts, core.value)
    if total.status == CONVERGED and total.error > tol * max(1.0, abs(total.value)):
        return Estimate(total.value, total.error, SLOW, total.diagnostic)
    return total


def integrate2d(f: Callable[[float, float], float], xdom: tuple[float, float],
                ydom: tuple[float, float] | Callable[[float], tuple[float, float]],
                tol: float = DEFAULT_TOL_2D, xopts: dict | None = None,
                yopts: dict | Callable[[float], dict] | None = None) -> Estimate:
    """Nested integral of f(x, y); the inner y-integral runs at tol/10.

    ``ydom`` and ``yopts`` may depend on x (callables), which lets the inner
    integral follow a moving bulk such as a Gaussian kernel centred at a
    function of x.
    """
    xopts = xopts or {}
    worst = {"status": CONVERGED, "diag": ""}

    def inner(x):
        dom = ydom(x) if callable(ydom) else ydom
        opts = yopts(x) if callable(yopts) else (yopts or {})
        est = integrate(lambda y: f(x, y), dom[0], dom[1], tol / 10, **opts)
        if _RANK[est.status] > _RANK[worst["status"]]:
            worst["status"] = est.status
            worst["diag"] = f"inner at x={x:.6g}: {est.diagnostic}"
        return est.value if math.isfinite(est.value) else 0.0

    outer = integrate(inner, xdom[0], xdom[1], tol, **xopts)
    status = _worst(outer.status, worst["status"])
    return Estimate(outer.value, outer.error + tol * max(1.0, abs(outer.value)) / 10,
                    status, _join(outer.diagnostic, worst["diag"]))


def mc_expectation(dist, g: Callable, n: int, seed: int) -> Estimate:
    """Sample mean of g(X) with a 3-sigma error bound.

    Heavy tails are flagged two ways: the bound on all draws should be about
    half the median bound over four quarter-size blocks, and no single draw
    should carry a sizeable share of the spread.
    """
    if n < 100:
        raise ValueError("mc_expectation needs n >= 100")
    x = dist.sample(n, seed)
    with np.errstate(all="ignore"):
        vals = np.asarray(g(x), dtype=float)
    if vals.shape != x.shape:
        vals = np.broadcast_to(vals, x.shape).astype(float)
    finite = np.isfinite(vals)
    bad = int((~finite).sum())
    if bad:
        v = vals[finite]
        mean = float(v.mean()) if v.size else math.nan
        return Estimate(mean, math.inf, NOT_INTEGRABLE, f"{bad} non-finite draws of g out of {n}")
    mean = float(vals.mean())
    bound = 3.0 * float(vals.std(ddof=1)) / math.sqrt(n)
    q = n // 4
    blocks = [3.0 * float(vals[k * q:(k + 1) * q].std(ddof=1)) / math.sqrt(q) for k in range(4)]
    bound_q = float(np.median(blocks))
    if bound_q > 0 and bound > 0.8 * bound_q:
        return Estimate(mean, bound, DIVERGENT,
                        f"error bound not shrinking: {bound_q:.3g} at n={q}, {bound:.3g} at n={n}")
    dev = (vals - mean) ** 2
    total = float(dev.sum())
    share = float(dev.max()) / total if total > 0 else 0.0
    if share > 10.0 / math.sqrt(n):
        return Estimate(mean, bound, DIVERGENT,
                        f"one draw carries {share:.2%} of the sample variance")
    return Estimate(mean, bound)


# vectorized fixed rules used by the Gaussian-noise engine

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights on [0, 1]."""
    if order not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(order)
        _GL_CACHE[order] = ((x + 1.0) / 2.0, w / 2.0)
    return _GL_CACHE[order]


def panel_rule(edges: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule for panels given by ``edges``.

    ``edges`` has shape (..., P+1) and must be sorted along the last axis;
    returns nodes and weights of shape (..., P*order).
    """
    t, w = gauss_legendre(order)
    lo = edges[..., :-1, None]
    width = (edges[..., 1:] - edges[..., :-1])[..., None]
    nodes = lo + width * t
    weights = width * w
    shape = edges.shape[:-1] + (-1,)
    return nodes.reshape(shape), weights.reshape(shape)
