"""Splitting angle, kappa and the three-way verdicts at one parameter point.

Conventions (all logs natural):

    kappa = exp(2 h1/E1) + exp(2 h2/E2)            (h_i = h_phi(X_i), E_i = E phi(X_i))
    WEPI:  kappa <= exp(2 h/E)                     (h, E for X = X1 + X2)
    alpha = atan exp(h2/E2 - h1/E1),  Y1 = X1/cos(alpha),  Y2 = X2/sin(alpha)
    WLSI:  cos^2 h_{phi_C}(Y1) + sin^2 h_{phi_S}(Y2) <= h,  phi_C(x) = phi(x cos), phi_S(x) = phi(x sin)
    cond15: kappa >= 1 with E1, E2 >= E, or kappa <= 1 with E1, E2 <= E

A flag is decisive only when the signed margin clears its propagated
error bound; otherwise the point is ``undecided``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from scipy.special import expit

from . import distributions as D
from .entropy import MomentDivergence, weighted_moment, wde_quadrature
from .numerics import DEFAULT_TOL, DIVERGENT, Estimate, IntegrationError, integrate
from .weights import KinkError, WeightDomainError, WeightFn, scale_weight

HOLDS = "holds"
FAILS = "fails"
UNDECIDED = "undecided"
INAPPLICABLE = "inapplicable"

HOLDS_GE = "holds-ge"
HOLDS_LE = "holds-le"


def flag(margin: float, bound: float) -> str:
    """Tri-state decision for 'margin >= 0'."""
    if not (math.isfinite(margin) and math.isfinite(bound)):
        return UNDECIDED
    if margin > bound:
        return HOLDS
    if margin < -bound:
        return FAILS
    if bound == 0.0 and margin == 0.0:
        return HOLDS
    return UNDECIDED


class Inapplicable(ArithmeticError):
    pass


@dataclass(frozen=True)
class Split:
    alpha: float
    cos2: float
    sin2: float
    y1: D.Dist
    y2: D.Dist
    phi_c: WeightFn
    phi_s: WeightFn


@dataclass
class PairAnalysis:
    """Lazily computed weighted quantities for (X1, X2, X = X1 + X2, Y1, Y2)."""

    d1: D.Dist
    d2: D.Dist
    w: WeightFn
    tol: float = DEFAULT_TOL
    x: D.Dist | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.x is None:
            self.x = D.convolve(self.d1, self.d2)

    def _get(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def _checked(self, est: Estimate, what: str) -> Estimate:
        if est.status == DIVERGENT or not math.isfinite(est.value):
            raise MomentDivergence(what, est)
        return est

    def E(self, which: str) -> Estimate:
        d = {"1": self.d1, "2": self.d2, "x": self.x}[which]

        def run():
            e = self._checked(weighted_moment(d, self.w, "phi", self.tol), f"E phi(X{which})")
            if not e.value > 0:
                raise Inapplicable(f"E phi(X{which}) = {e.value!r} is not positive")
            return e
        return self._get(("E", which), run)

    def h(self, which: str) -> Estimate:
        d = {"1": self.d1, "2": self.d2, "x": self.x}[which]
        return self._get(("h", which), lambda: self._checked(
            wde_quadrature(d, self.w, self.tol), f"h_phi(X{which})"))

    def ratio(self, which: str) -> Estimate:
        """h/E with first-order error."""
        h, E = self.h(which), self.E(which)
        r = h.value / E.value
        return Estimate(r, h.error / E.value + abs(r) * E.error / E.value)

    def power(self, which: str) -> Estimate:
        r = self.ratio(which)
        try:
            v = math.exp(2 * r.value)
        except OverflowError:
            v = math.inf
        return Estimate(v, v * 2 * r.error)

    def split(self) -> Split:
        def run():
            d = self.ratio("2").value - self.ratio("1").value
            alpha = math.atan(math.exp(d)) if d < 700 else math.pi / 2
            cos2, sin2 = float(expit(-2 * d)), float(expit(2 * d))
            c, s = math.sqrt(cos2), math.sqrt(sin2)
            if c == 0 or s == 0:
                raise Inapplicable("splitting angle degenerates to 0 or pi/2")
            return Split(alpha, cos2, sin2, D.scale(self.d1, 1 / c), D.scale(self.d2, 1 / s),
                         scale_weight(self.w, c), scale_weight(self.w, s))
        return self._get("split", run)

    def h_y(self, which: str) -> Estimate:
        sp = self.split()
        d, w = (sp.y1, sp.phi_c) if which == "1" else (sp.y2, sp.phi_s)
        return self._get(("hy", which), lambda: self._checked(
            wde_quadrature(d, w, self.tol), f"h(Y{which})"))


@dataclass(frozen=True)
class IneqVerdict:
    applicable: bool
    alpha: float = math.nan
    kappa: float = math.nan
    kappa_err: float = math.nan
    tau: float = math.nan
    lam: float = math.nan
    e_phi: tuple = (math.nan, math.nan, math.nan)
    wepi_lhs: float = math.nan
    wepi_rhs: float = math.nan
    wepi: str = INAPPLICABLE
    margin_wepi: float = math.nan
    bound_wepi: float = math.nan
    cond15: str = INAPPLICABLE
    wlsi_lhs: float = math.nan
    wlsi_rhs: float = math.nan
    wlsi: str = INAPPLICABLE
    margin_wlsi: float = math.nan
    bound_wlsi: float = math.nan
    thm2_lhs: float = math.nan
    thm2_rhs: float = math.nan
    thm2: str = INAPPLICABLE
    margin_thm2: float = math.nan
    bound_thm2: float = math.nan
    diagnostic: str = ""

    @property
    def cond15_flag(self) -> str:
        return HOLDS if self.cond15 in (HOLDS_GE, HOLDS_LE) else self.cond15

    def as_dict(self) -> dict:
        out = asdict(self)
        out["e_phi"] = list(self.e_phi)
        return out


def split_angle(d1: D.Dist, d2: D.Dist, w: WeightFn, tol: float = DEFAULT_TOL) -> Split:
    return PairAnalysis(d1, d2, w, tol).split()


def kappa(d1: D.Dist, d2: D.Dist, w: WeightFn, tol: float = DEFAULT_TOL) -> Estimate:
    p = PairAnalysis(d1, d2, w, tol)
    return p.power("1") + p.power("2")


def tau_lambda(d1: D.Dist, d2: D.Dist, w: WeightFn, tol: float = DEFAULT_TOL) -> tuple[float, float]:
    """tau = sum of weighted entropy powers of f and g; lambda = share of f."""
    p = PairAnalysis(d1, d2, w, tol)
    a, b = p.power("1").value, p.power("2").value
    tau = a + b
    return tau, a / tau


def _cond15(p: PairAnalysis, k: Estimate) -> str:
    E1, E2, E = p.E("1"), p.E("2"), p.E("x")
    kf = flag(k.value - 1.0, k.error)
    if kf == UNDECIDED:
        return UNDECIDED
    sign = 1.0 if kf == HOLDS else -1.0  # kappa >= 1 asks E_i >= E
    flags = [flag(sign * (Ei.value - E.value), Ei.error + E.error) for Ei in (E1, E2)]
    if FAILS in flags:
        return FAILS
    if UNDECIDED in flags:
        return UNDECIDED
    if k.value == 1.0 and k.error == 0.0:
        return HOLDS_GE
    return HOLDS_GE if sign > 0 else HOLDS_LE


def check_cond15(d1, d2, w, tol: float = DEFAULT_TOL) -> str:
    try:
        p = PairAnalysis(d1, d2, w, tol)
        return _cond15(p, p.power("1") + p.power("2"))
    except (MomentDivergence, Inapplicable, IntegrationError, WeightDomainError):
        return INAPPLICABLE


def _wepi(p: PairAnalysis):
    k = p.power("1") + p.power("2")
    rhs = p.power("x")
    return k, rhs, rhs.value - k.value, rhs.error + k.error


def _wlsi(p: PairAnalysis):
    sp = p.split()
    hy1, hy2, h = p.h_y("1"), p.h_y("2"), p.h("x")
    lhs = sp.cos2 * hy1.value + sp.sin2 * hy2.value
    lhs_err = sp.cos2 * hy1.error + sp.sin2 * hy2.error
    return lhs, h.value, h.value - lhs, lhs_err + h.error


def _thm2(p: PairAnalysis):
    lam = p.split().cos2
    h1, h2, h = p.h("1"), p.h("2"), p.h("x")
    E1, E2 = p.E("1"), p.E("2")
    ll = lam * math.log(lam) if lam > 0 else 0.0
    mm = (1 - lam) * math.log(1 - lam) if lam < 1 else 0.0
    lhs = 2 * h.value
    rhs = 2 * lam * h1.value + 2 * (1 - lam) * h2.value - E1.value * ll - E2.value * mm
    err = 2 * h.error + 2 * lam * h1.error + 2 * (1 - lam) * h2.error \
        + abs(ll) * E1.error + abs(mm) * E2.error
    return lhs, rhs, lhs - rhs, err


def check_wepi(d1, d2, w, tol: float = DEFAULT_TOL):
    """(lhs, rhs, flag, margin, bound) with lhs = kappa."""
    try:
        k, rhs, m, b = _wepi(PairAnalysis(d1, d2, w, tol))
        return k.value, rhs.value, flag(m, b), m, b
    except (MomentDivergence, Inapplicable, IntegrationError, WeightDomainError):
        return math.nan, math.nan, INAPPLICABLE, math.nan, math.nan


def check_wlsi(d1, d2, w, tol: float = DEFAULT_TOL):
    try:
        lhs, rhs, m, b = _wlsi(PairAnalysis(d1, d2, w, tol))
        return lhs, rhs, flag(m, b), m, b
    except (MomentDivergence, Inapplicable, IntegrationError, WeightDomainError):
        return math.nan, math.nan, INAPPLICABLE, math.nan, math.nan


def theorem2_check(d1, d2, w, tol: float = DEFAULT_TOL):
    try:
        lhs, rhs, m, b = _thm2(PairAnalysis(d1, d2, w, tol))
        return lhs, rhs, flag(m, b), m, b
    except (MomentDivergence, Inapplicable, IntegrationError, WeightDomainError):
        return math.nan, math.nan, INAPPLICABLE, math.nan, math.nan


def analyze(d1: D.Dist, d2: D.Dist, w: WeightFn, tol: float = DEFAULT_TOL) -> IneqVerdict:
    """All verdicts at one point, sharing the weighted quantities."""
    p = PairAnalysis(d1, d2, w, tol)
    try:
        k = p.power("1") + p.power("2")
        sp = p.split()
        c15 = _cond15(p, k)
        _, rhs, mw, bw = _wepi(p)
        wl, wr, ml, bl = _wlsi(p)
        tl, tr, mt, bt = _thm2(p)
    except (MomentDivergence, Inapplicable, IntegrationError, WeightDomainError) as exc:
        return IneqVerdict(applicable=False, diagnostic=str(exc))
    tau, lam = k.value, p.power("1").value / k.value
    return IneqVerdict(
        applicable=True, alpha=sp.alpha, kappa=k.value, kappa_err=k.error, tau=tau, lam=lam,
        e_phi=(p.E("1").value, p.E("2").value, p.E("x").value),
        wepi_lhs=k.value, wepi_rhs=rhs.value, wepi=flag(mw, bw), margin_wepi=mw, bound_wepi=bw,
        cond15=c15,
        wlsi_lhs=wl, wlsi_rhs=wr, wlsi=flag(ml, bl), margin_wlsi=ml, bound_wlsi=bl,
        thm2_lhs=tl, thm2_rhs=tr, thm2=flag(mt, bt), margin_thm2=mt, bound_thm2=bt,
    )


def stein_check(w: WeightFn, sigma: float, tol: float = 1e-12) -> Estimate:
    """E[Z^2 phi(Z)] - sigma^2 E phi(Z) - sigma^4 E phi''(Z) for Z ~ N(0, sigma^2)."""
    if w.d2 is None:
        raise KinkError(f"weight {w.source} has no second derivative")
    if w.kinks:
        raise KinkError(f"weight {w.source} is not twice differentiable at {w.kinks}")
    z = D.Normal(0.0, sigma)
    pdf = z.pdf1

    def run(g):
        return integrate(lambda x: g(x) * pdf(x), -math.inf, math.inf, tol, center=0.0,
                         scale=sigma)

    lhs = run(lambda x: x * x * w(x))
    e0 = run(w)
    e2 = run(w.second_derivative)
    return lhs - e0.scaled(sigma ** 2) - e2.scaled(sigma ** 4)
