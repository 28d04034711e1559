"""Weighted moments and weighted differential entropies (nats).

h_phi(Z) = -E[phi(Z) ln f_Z(Z)].  Quadrature is the reference route; the
per-family closed forms express the same quantity through weighted
moments and are kept as an independent second route.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import special

from . import distributions as D
from .numerics import CONVERGED, DEFAULT_TOL, DIVERGENT, Estimate, integrate
from .weights import WeightFn, scale_weight, weight_cumulative

KINDS = ("phi", "x_phi", "x2_phi", "phi_ln_x")

QUADRATURE = "quadrature"
CLOSED_FORM = "closed_form"
BOTH = "both"


class MomentDivergence(ArithmeticError):
    def __init__(self, what: str, estimate: Estimate):
        super().__init__(f"{what} does not exist: {estimate.status} ({estimate.diagnostic})")
        self.what = what
        self.estimate = estimate


def _expect(d: D.Dist, w: WeightFn, g, tol: float) -> Estimate:
    """E[phi(X) g(x, ln f)] with the weight's kinks as break points."""
    lo, hi = d.support
    pts = tuple(k for k in w.kinks if lo < k < hi)
    if not pts or d.log_domain:
        return d.expect(lambda x, lf: w(x) * g(x, lf), tol)

    def k(x):
        lf = d.logpdf1(x)
        if lf == -math.inf:
            return 0.0
        return w(x) * g(x, lf) * math.exp(lf)

    return integrate(k, lo, hi, tol, points=tuple(d.breakpoints) + pts, center=d.center,
                     scale=d.scale)


def weighted_moment(d: D.Dist, w: WeightFn, kind: str = "phi", tol: float = DEFAULT_TOL) -> Estimate:
    """E[phi], E[X phi], E[X^2 phi] or E[phi ln X]."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    if kind == "phi_ln_x" and d.support[0] < 0:
        raise ValueError("E[phi ln X] needs a distribution supported in (0, inf)")
    if kind == "phi" and w.constant is not None:
        return Estimate(w.constant, 0.0)
    g = {
        "phi": lambda x, lf: 1.0,
        "x_phi": lambda x, lf: x,
        "x2_phi": lambda x, lf: x * x,
        "phi_ln_x": lambda x, lf: math.log(x) if x > 0 else 0.0,
    }[kind]
    return _expect(d, w, g, tol)


def wde_quadrature(d: D.Dist, w: WeightFn, tol: float = DEFAULT_TOL) -> Estimate:
    return _expect(d, w, lambda x, lf: -lf, tol)


@dataclass(frozen=True)
class WdeReport:
    e_phi: Estimate
    e_x_phi: Estimate | None
    e_x2_phi: Estimate | None
    e_phi_ln_x: Estimate | None
    h: Estimate
    method: str
    closed: Estimate | None = None
    quad: Estimate | None = None
    discrepancy: float | None = None

    @property
    def consistent(self) -> bool | None:
        if self.closed is None or self.quad is None:
            return None
        return abs(self.discrepancy) <= self.closed.error + self.quad.error

    def as_dict(self) -> dict:
        def e(v):
            return None if v is None else {"value": v.value, "error": v.error, "status": v.status}
        return {"e_phi": e(self.e_phi), "e_x_phi": e(self.e_x_phi), "e_x2_phi": e(self.e_x2_phi),
                "e_phi_ln_x": e(self.e_phi_ln_x), "h": e(self.h), "method": self.method,
                "closed": e(self.closed), "quadrature": e(self.quad),
                "discrepancy": self.discrepancy}


# ------------------------------------------------------------------ closed forms

def _lin(terms) -> Estimate:
    """sum c_i * E_i for (c, Estimate-or-float) pairs."""
    val, err, status, diag = 0.0, 0.0, CONVERGED, []
    for c, e in terms:
        if isinstance(e, Estimate):
            val += c * e.value
            err += abs(c) * e.error
            if e.status != CONVERGED:
                status = e.status if status == CONVERGED or e.status == DIVERGENT else status
                diag.append(e.diagnostic)
        else:
            val += c * e
    return Estimate(val, err, status, "; ".join(x for x in diag if x))


def _central2(d, w, mu, tol):
    return _expect(d, w, lambda x, lf: (x - mu) ** 2, tol)


def closed_form_wde(d: D.Dist, w: WeightFn, tol: float = DEFAULT_TOL) -> Estimate:
    """Family formula in terms of weighted moments (each by quadrature)."""
    E = weighted_moment(d, w, "phi", tol)
    if isinstance(d, D.Normal):
        m2 = _central2(d, w, d.mu, tol)
        return _lin([(0.5 * math.log(2 * math.pi * d.sigma ** 2), E), (0.5 / d.sigma ** 2, m2)])
    if isinstance(d, D.Gamma):
        ln_norm = math.lgamma(d.beta) - d.beta * math.log(d.lam)
        return _lin([(1 - d.beta, weighted_moment(d, w, "phi_ln_x", tol)),
                     (d.lam, weighted_moment(d, w, "x_phi", tol)), (ln_norm, E)])
    if isinstance(d, D.Exponential):
        return _lin([(-math.log(d.lam), E), (d.lam, weighted_moment(d, w, "x_phi", tol))])
    if isinstance(d, D.Uniform):
        return uniform_phi_mass(w, d.a, d.b, tol).scaled(math.log(d.L) / d.L)
    if isinstance(d, D.Cauchy):
        lg = _expect(d, w, lambda x, lf: math.log1p(((x - d.mu) / d.theta) ** 2), tol)
        return _lin([(math.log(math.pi * d.theta), E), (1.0, lg)])
    if isinstance(d, D.Trapezoid):
        lam = trapezoid_lambda(d, w, tol)
        Ex = trapezoid_e_phi(d, w, tol)
        return _lin([(-1.0, lam), (math.log(d.L1 * d.L2), Ex)])
    if isinstance(d, D.GammaUniformSum):
        theta = gamma_uniform_theta(d, w, tol)
        ediff = gamma_uniform_phi_mass(d, w, tol)
        return _lin([(math.log(d.L) / d.L, ediff), (-1.0 / d.L, theta)])
    if isinstance(d, D.ExpMixture):
        l1, l2 = d.l1, d.l2
        x1, x2 = D.Exponential(l1), D.Exponential(l2)

        def lg(x, lf):
            return math.log((math.exp(-l2 * x) - math.exp(-l1 * x)) / (l1 - l2)) if x > 0 else 0.0

        e1, e2 = weighted_moment(x1, w, "phi", tol), weighted_moment(x2, w, "phi", tol)
        g1, g2 = _expect(x1, w, lg, tol), _expect(x2, w, lg, tol)
        k = 1.0 / (l1 - l2)
        return _lin([(math.log(l1 * l2) * k * l2, e1), (-math.log(l1 * l2) * k * l1, e2),
                     (l2 * k, g1), (-l1 * k, g2)])
    if isinstance(d, D.LogHeavy):
        lg = _expect(d, w, lambda x, lf: math.log(x) + math.log1p(math.log(x) ** 2), tol)
        return _lin([(1.0, lg), (-math.log(D.LOGHEAVY_NORM), E)])
    if isinstance(d, D.Scaled):
        base = closed_form_wde(d.base, scale_weight(w, d.c), tol)
        Eb = weighted_moment(d.base, scale_weight(w, d.c), "phi", tol)
        return _lin([(1.0, base), (math.log(d.c), Eb)])
    raise NotImplementedError(f"no closed form for {d.family}")


def uniform_phi_mass(w: WeightFn, a: float, b: float, tol: float = DEFAULT_TOL) -> Estimate:
    """Phi(b) - Phi(a)."""
    if w.constant is not None:
        return Estimate(w.constant * (b - a), 0.0)
    return integrate(w, a, b, tol, points=w.kinks)


def trapezoid_e_phi(d: D.Trapezoid, w: WeightFn, tol: float = DEFAULT_TOL) -> Estimate:
    """E phi(X) through Phi and Phi* at the corner points."""
    A, C1, C2, B = d.corners
    Lmin = min(d.L1, d.L2)
    P = {t: weight_cumulative(w, t, tol) for t in (A, C1, C2, B)}
    phi = {t: v[0] for t, v in P.items()}
    phis = {t: v[1] for t, v in P.items()}
    return _lin([(1.0, phis[C1]), (-1.0, phis[A]), (-1.0, phis[B]), (1.0, phis[C2]),
                 (-A, phi[C1]), (A, phi[A]), (Lmin, phi[C2]), (-Lmin, phi[C1]),
                 (B, phi[B]), (-B, phi[C2])]).scaled(1.0 / (d.L1 * d.L2))


def trapezoid_ramps(d: D.Trapezoid, w: WeightFn, tol: float = DEFAULT_TOL) -> Estimate:
    A, C1, C2, B = d.corners

    def up(x):
        t = x - A
        return w(x) * t * math.log(t) if t > 0 else 0.0

    def down(x):
        t = B - x
        return w(x) * t * math.log(t) if t > 0 else 0.0

    return integrate(up, A, C1, tol, points=w.kinks) + integrate(down, C2, B, tol, points=w.kinks)


def trapezoid_lambda(d: D.Trapezoid, w: WeightFn, tol: float = DEFAULT_TOL,
                     printed_sign: bool = False) -> Estimate:
    """ln(Lmin)/Lmax [Phi(C2) - Phi(C1)] + ramps/(L1 L2); ``printed_sign`` flips the first term."""
    A, C1, C2, B = d.corners
    Lmin, Lmax = sorted((d.L1, d.L2))
    plateau = weight_cumulative(w, C2, tol)[0] - weight_cumulative(w, C1, tol)[0]
    sign = -1.0 if printed_sign else 1.0
    return _lin([(sign * math.log(Lmin) / Lmax, plateau),
                 (1.0 / (d.L1 * d.L2), trapezoid_ramps(d, w, tol))])


def _gu_diff(d: D.GammaUniformSum, t: float) -> float:
    return d.pdf1(t) * d.L


def gamma_uniform_theta(d: D.GammaUniformSum, w: WeightFn, tol: float = DEFAULT_TOL) -> Estimate:
    """int phi(x) D(x) ln D(x) dx with D = F(x - a) - F(x - b)."""
    def k(x):
        lp = d.logpdf1(x)
        if lp == -math.inf:
            return 0.0
        lD = lp + math.log(d.L)
        return w(x) * math.exp(lD) * lD

    return integrate(k, d.a, math.inf, tol, points=tuple(d.breakpoints) + w.kinks,
                     center=d.center, scale=d.scale)


def gamma_uniform_phi_mass(d: D.GammaUniformSum, w: WeightFn, tol: float = DEFAULT_TOL) -> Estimate:
    """E[Phi(X1 + b) - Phi(X1 + a)] over the gamma summand."""
    if w.constant is not None:
        return Estimate(w.constant * d.L, 0.0)
    return _expect(d.g, _unit(), lambda x, lf: uniform_phi_mass(w, x + d.a, x + d.b, tol * 0.1).value,
                   tol)


def _unit():
    from .weights import builtin_weight
    return builtin_weight("one")


def wde(d: D.Dist, w: WeightFn, method: str = QUADRATURE, tol: float = DEFAULT_TOL,
        moments: bool = True) -> WdeReport:
    """Weighted differential entropy with its moments.

    Raises MomentDivergence if E phi or the entropy integral does not exist.
    """
    if method not in (QUADRATURE, CLOSED_FORM, BOTH):
        raise ValueError(f"unknown method {method!r}")
    E = weighted_moment(d, w, "phi", tol)
    if E.status == DIVERGENT:
        raise MomentDivergence("E phi", E)
    ex = ex2 = elx = None
    if moments:
        ex = weighted_moment(d, w, "x_phi", tol)
        ex2 = weighted_moment(d, w, "x2_phi", tol)
        if d.support[0] >= 0:
            elx = weighted_moment(d, w, "phi_ln_x", tol)
    quad = closed = None
    if method in (QUADRATURE, BOTH):
        quad = wde_quadrature(d, w, tol)
        if quad.status == DIVERGENT:
            raise MomentDivergence("weighted entropy", quad)
    if method in (CLOSED_FORM, BOTH):
        closed = closed_form_wde(d, w, tol)
        if closed.status == DIVERGENT:
            raise MomentDivergence("weighted entropy (closed form)", closed)
    h = quad if quad is not None else closed
    disc = None if (quad is None or closed is None) else closed.value - quad.value
    return WdeReport(E, ex, ex2, elx, h, method, closed, quad, disc)


def wde_scaling_identity_check(d: D.Dist, w: WeightFn, c: float, tol: float = DEFAULT_TOL) -> Estimate:
    """h_phi(X) - [h_{phi_c}(X / c) + E phi(X) ln c]; both entropies by quadrature."""
    if not c > 0:
        raise ValueError("c must be positive")
    h = wde_quadrature(d, w, tol)
    Y = D.scale(d, 1.0 / c)
    hy = wde_quadrature(Y, scale_weight(w, c), tol)
    E = weighted_moment(d, w, "phi", tol)
    for est, what in ((h, "h(X)"), (hy, "h(X/c)"), (E, "E phi")):
        if est.status == DIVERGENT:
            raise MomentDivergence(what, est)
    return _lin([(1.0, h), (-1.0, hy), (-math.log(c), E)])


def gamma_shannon(beta: float, lam: float) -> float:
    return beta - math.log(lam) + math.lgamma(beta) + (1 - beta) * float(special.digamma(beta))


def weighted_conditional_entropy(rho, z: D.Dist, gamma: float, **kw) -> Estimate:
    """h_rho(Z | sqrt(gamma) Z + N), N ~ N(0, 1)."""
    from .gaussian_noise import NoiseGrid
    return NoiseGrid(z, gamma, **kw).conditional_entropy(rho)


def weighted_mutual_entropy(rho, z: D.Dist, gamma: float, route: str = "direct", **kw) -> Estimate:
    """i_rho(Z : sqrt(gamma) Z + N).

    ``direct`` integrates rho f phi ln[phi / f_V]; ``difference`` evaluates
    h_psi(Z) - h_rho(Z | V) with psi(x) = int rho(x, y) phi(y - sqrt(gamma) x) dy.
    """
    from .gaussian_noise import NoiseGrid, psi_weight
    grid = NoiseGrid(z, gamma, **kw)
    if route == "direct":
        return grid.mutual_entropy(rho)
    if route == "difference":
        psi = psi_weight(rho, gamma)
        return wde_quadrature(z, psi, kw.get("tol", 1e-10)) - grid.conditional_entropy(rho)
    raise ValueError(f"unknown route {route!r}")
