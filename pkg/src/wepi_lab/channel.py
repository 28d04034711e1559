"""Gaussian channel V = sqrt(gamma) Z + N, N ~ N(0, 1).

Everything is built on ``NoiseGrid``: one y-grid, per-row Gauss-Legendre
nodes in x, and posterior weights of Z given V = y.  Notation:

    S(y)   = E[N | V = y]               (score of V, up to sign)
    xi(y)  = y S(y)
    eta(y) = E[N Z | V = y]
    H(g)   = -int J_rho(y) ln f_V(y) dy,  J_rho(y) = int rho(x, y) phi(y - sqrt(g) x) f(x) dx
    M(g)   = E Var(Z | V) = (1 - J(V)) / g

The derivative of H that the zeta form actually produces is

    dH/dg = -(1 / (2 sqrt g)) E[zeta(Z, V) S(V) + rho(Z, V) eta(V)]

which differs in sign and in xi -> S from the displayed identity; both are
reported so that the difference is visible.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import distributions as D
from .entropy import wde_quadrature
from .gaussian_noise import (NoiseGrid, check_signal, make_frame, rho_bar_weight, xi_eta_value,
                             zeta_value)
from .numerics import CONVERGED, NOT_INTEGRABLE, SLOW, Estimate, gauss_legendre
from .weights import WeightFn2D, rho_from_spec

H_NOISE = 0.5 * math.log(2 * math.pi * math.e)
ONE = rho_from_spec("one")


@dataclass(frozen=True)
class ChannelPoint:
    gamma: float
    mmse: Estimate
    y: np.ndarray | None = None
    xi: np.ndarray | None = None
    eta: np.ndarray | None = None


def mmse(z: D.Dist, gamma: float) -> Estimate:
    """M(Z; gamma) = E[(Z - E[Z | V])^2]."""
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    check_signal(z)
    if gamma == 0:
        return Estimate(z.variance, 0.0)
    return NoiseGrid(z, gamma).mmse()


def channel_point(z: D.Dist, gamma: float, samples: bool = False) -> ChannelPoint:
    if gamma == 0 or not samples:
        return ChannelPoint(gamma, mmse(z, gamma))
    g = NoiseGrid(z, gamma)
    return ChannelPoint(gamma, g.mmse(), g.y.copy(), g.y * g.score(), g.eta())


def xi_eta(z: D.Dist, y: float, gamma: float) -> tuple[Estimate, Estimate]:
    if not gamma > 0:
        raise ValueError("gamma must be > 0")
    return xi_eta_value(z, y, gamma)


def zeta(rho: WeightFn2D, z: D.Dist, x: float, y: float, gamma: float) -> Estimate:
    if not gamma > 0:
        raise ValueError("gamma must be > 0")
    return zeta_value(rho, z, x, y, gamma)


# -- entropy from the MMSE curve

def _fisher(z: D.Dist, gamma: float) -> Estimate:
    return NoiseGrid(z, gamma).fisher()


def _gl_panels(edges, order):
    t, w = gauss_legendre(order)
    edges = np.asarray(edges, float)
    a, b = edges[:-1, None], edges[1:, None]
    return (a + (b - a) * t).ravel(), ((b - a) * w).ravel()


def _quad_curve(fn, edges, order) -> tuple[float, float]:
    """sum w_i fn(x_i); second value collects the per-node error bounds."""
    xs, ws = _gl_panels(edges, order)
    vals = [fn(x) for x in xs]
    return (float(sum(w * v.value for w, v in zip(ws, vals))),
            float(sum(abs(w) * v.error for w, v in zip(ws, vals))))


@dataclass(frozen=True)
class DebruijnResult:
    h: Estimate
    low: float            # int_0^1 M
    high: float           # -int_1^G J / g
    tail: float           # -int_G^inf J / g, power-law extrapolated
    decay_power: float    # p in J / g ~ g^{-p}


def sde_via_debruijn(z: D.Dist, gamma_max: float = 1e4, tol: float = 1e-6,
                     panels_per_decade: int = 2) -> DebruijnResult:
    """h(Z) = h(N) + 1/2 [int_0^1 M dg + int_1^inf (M - 1/g) dg].

    On [1, G] the integrand is M - 1/g = -J(V)/g, integrated in u = ln g.
    Beyond G, J/g is fitted to a power law over the last decade.  The error
    combines two Gauss-Legendre orders, the grid bounds and the spread of
    two tail fits.
    """
    check_signal(z)
    if gamma_max <= 10:
        raise ValueError("gamma_max must exceed 10")
    low_edges = [0.0, 0.25, 0.5, 1.0]
    L = math.log(gamma_max)
    n = max(2, int(math.ceil(panels_per_decade * L / math.log(10))))
    high_edges = np.linspace(0.0, L, n + 1)

    def M(g):
        return mmse(z, g)

    def negJ(u):
        return -_fisher(z, math.exp(u))

    results = []
    for order in (8, 12):
        lo, elo = _quad_curve(M, low_edges, order)
        hi, ehi = _quad_curve(negJ, high_edges, order)
        results.append((lo, hi, elo + ehi))
    (lo1, hi1, _), (lo2, hi2, e2) = results
    # tail: J(g) ~ C g^{1-p}
    jG = _fisher(z, gamma_max).value
    fits = []
    for back in (10.0, math.sqrt(10.0)):
        jb = _fisher(z, gamma_max / back).value
        slope = math.log(jG / jb) / math.log(back) if jG > 0 and jb > 0 else 0.0
        fits.append(1.0 - slope)
    p = fits[0]
    status, diag = CONVERGED, ""
    if not all(q > 1.05 for q in fits):
        status, diag = SLOW, f"J(V)/gamma decays like gamma^-{p:.3g}; tail not summable"
        tail, etail = -math.inf, math.inf
    else:
        tails = [-jG / (q - 1.0) for q in fits]
        tail, etail = tails[0], abs(tails[0] - tails[1])
    value = H_NOISE + 0.5 * (lo2 + hi2 + tail)
    err = 0.5 * (abs(lo2 - lo1) + abs(hi2 - hi1) + e2 + etail)
    if status == CONVERGED and err > tol:
        status, diag = SLOW, f"error bound {err:.2e} above tol {tol:.1e}"
    return DebruijnResult(Estimate(value, err, status, diag), lo2, hi2, tail, p)


# -- Theorem-3 type derivative identity

@dataclass(frozen=True)
class DerivativeCheck:
    gamma: float
    fd: float                 # central difference of H
    rhs: Estimate             # corrected zeta form
    rhs_printed: Estimate     # as displayed: (1/2s) E[zeta xi - rho eta]
    residual: float           # fd - rhs
    residual_printed: float
    bound: float              # grid error + finite-difference truncation estimate
    order: float              # observed order of the step-halving ladder
    boundary: Estimate        # int int rho n x phi f; must vanish for the zeta form
    status: str
    diagnostic: str = ""

    @property
    def within_bound(self) -> bool:
        return self.status == CONVERGED and abs(self.residual) <= self.bound


def _central_difference(rho, z, gamma, step, frame):
    hp = NoiseGrid(z, gamma + step, frame=frame).weighted_output_entropy(rho)
    hm = NoiseGrid(z, gamma - step, frame=frame).weighted_output_entropy(rho)
    return (hp.value - hm.value) / (2 * step), (hp.error + hm.error) / (2 * step)


def theorem3_derivative_check(rho: WeightFn2D, z: D.Dist, gamma: float,
                              step_rel: float = 1e-3) -> DerivativeCheck:
    """Compare dH/dgamma by central differences with the zeta-form expectation."""
    if not gamma > 0:
        raise ValueError("gamma must be > 0")
    check_signal(z)
    step = step_rel * gamma
    # one node set for every gamma on the ladder, so grid error cancels in differences
    frame = make_frame(z, gamma + step, pad=2.0)
    ladder = [_central_difference(rho, z, gamma, step / 2 ** k, frame) for k in range(3)]
    d0, d1, d2 = (v for v, _ in ladder)
    a, b = abs(d0 - d1), abs(d1 - d2)
    order = math.log2(a / b) if a > 0 and b > 0 else math.inf
    trunc = a * 4.0 / 3.0

    g = NoiseGrid(z, gamma)
    s = math.sqrt(gamma)
    t1, t2 = g.derivative_terms(rho)
    p1, p2 = g.derivative_terms_printed(rho)
    rhs = (t1 + t2).scaled(-1.0 / (2 * s))
    rhs_printed = (p1 - p2).scaled(1.0 / (2 * s))
    boundary = g.boundary_mass(rho)
    status, diag = CONVERGED, ""
    if abs(boundary.value) > 10 * boundary.error + 1e-10:
        status = NOT_INTEGRABLE
        diag = (f"int int rho (y - s x) x phi f = {boundary.value:.6g} does not vanish; "
                "the zeta form drops this boundary term")
    elif rhs.status != CONVERGED:
        status, diag = rhs.status, rhs.diagnostic
    bound = rhs.error + ladder[0][1] + trunc
    return DerivativeCheck(gamma, d0, rhs, rhs_printed, d0 - rhs.value, d0 - rhs_printed.value,
                           bound, order, boundary, status, diag)


# -- limit probes

GAMMAS_TO_0 = (1.0, 0.1, 0.01, 0.001)
GAMMAS_TO_INF = (1.0, 10.0, 100.0, 1000.0)


@dataclass(frozen=True)
class LimitProbe:
    mode: str
    gammas: tuple
    values: tuple               # Estimates
    target: Estimate
    gaps: tuple = field(default=())

    @property
    def last_gap(self) -> float:
        return self.gaps[-1]

    @property
    def monotone(self) -> bool:
        g = [abs(v) for v in self.gaps]
        return all(b <= a for a, b in zip(g, g[1:]))


def lemma_limit_probe(rho: WeightFn2D, z: D.Dist, mode: str,
                      gammas: tuple | None = None) -> LimitProbe:
    """gamma_to_0: weighted mutual entropy i(gamma), target 0.

    gamma_to_inf: H(gamma) - 1/2 ln(gamma) E rho(Z, V), target the rho-bar
    weighted entropy of Z (rho-bar = limit of rho as y -> sign(x) inf).
    Here H(gamma) = i + h_{psi*}(N), the weighted entropy of the output.
    """
    check_signal(z)
    if mode == "gamma_to_0":
        gs = tuple(gammas or GAMMAS_TO_0)
        vals = tuple(NoiseGrid(z, g).mutual_entropy(rho) for g in gs)
        target = Estimate(0.0, 0.0)
    elif mode == "gamma_to_inf":
        gs = tuple(gammas or GAMMAS_TO_INF)
        vals = []
        for g in gs:
            grid = NoiseGrid(z, g)
            H, E = grid.weighted_output_entropy(rho), grid.e_rho(rho)
            vals.append(H - E.scaled(0.5 * math.log(g)))
        vals = tuple(vals)
        target = wde_quadrature(z, rho_bar_weight(rho), 1e-10)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return LimitProbe(mode, gs, vals, target, tuple(v.value - target.value for v in vals))


# -- integrated representation

@dataclass(frozen=True)
class RepresentationCheck:
    gamma_max: float
    h0: Estimate                  # H(0): rho*-weighted entropy of N
    integral: Estimate            # int_0^G dH/dg from the zeta form
    h_end: Estimate               # H(G) computed directly
    correction: float             # 1/2 ln G E_G rho
    value: float                  # h0 + integral - correction
    target: Estimate              # rho-bar weighted entropy of Z

    @property
    def integral_residual(self) -> float:
        return self.h0.value + self.integral.value - self.h_end.value

    @property
    def gap(self) -> float:
        return self.value - self.target.value


def representation_check(rho: WeightFn2D, z: D.Dist, gamma_max: float = 1000.0,
                         order: int = 12) -> RepresentationCheck:
    """Integrate the corrected derivative over [0, G] in t = sqrt(gamma).

    With dg = 2 t dt the integrand becomes -E[zeta S + rho eta] at g = t^2,
    which is bounded at t = 0.
    """
    check_signal(z)
    T = math.sqrt(gamma_max)
    edges = [0.0]
    e = 0.5
    while e < T:
        edges.append(e)
        e *= 2
    edges.append(T)

    def integrand(t):
        if t == 0:
            return Estimate(0.0, 0.0)
        t1, t2 = NoiseGrid(z, t * t).derivative_terms(rho)
        return -(t1 + t2)

    coarse, _ = _quad_curve(integrand, edges, order)
    fine, err = _quad_curve(integrand, edges, order + 8)
    integral = Estimate(fine, err + abs(fine - coarse))
    h0 = NoiseGrid(z, 0.0).weighted_output_entropy(rho)
    end = NoiseGrid(z, gamma_max)
    h_end = end.weighted_output_entropy(rho)
    corr = 0.5 * math.log(gamma_max) * end.e_rho(rho).value
    target = wde_quadrature(z, rho_bar_weight(rho), 1e-10)
    return RepresentationCheck(gamma_max, h0, integral, h_end, corr,
                               h0.value + integral.value - corr, target)


# -- splitting inequality for the MMSE

@dataclass(frozen=True)
class SplitMmse:
    gamma: float
    lhs: Estimate      # M(X1 + X2)
    rhs: Estimate      # cos^2 M(Y1) + sin^2 M(Y2)

    @property
    def margin(self) -> float:
        return self.lhs.value - self.rhs.value

    @property
    def bound(self) -> float:
        return self.lhs.error + self.rhs.error

    @property
    def holds(self) -> bool:
        return self.margin >= -self.bound


def mmse_splitting_check(d1: D.Dist, d2: D.Dist, alpha: float, gammas) -> list[SplitMmse]:
    """M(X1 + X2; g) >= cos^2 M(X1/cos; g) + sin^2 M(X2/sin; g) on a gamma grid."""
    c, s = math.cos(alpha), math.sin(alpha)
    x = D.convolve(d1, d2)
    y1, y2 = D.scale(d1, 1 / c), D.scale(d2, 1 / s)
    out = []
    for g in gammas:
        rhs = mmse(y1, g).scaled(c * c) + mmse(y2, g).scaled(s * s)
        out.append(SplitMmse(float(g), mmse(x, g), rhs))
    return out


# -- CLI table

def _row(args):
    z, rho, g = args
    rho = rho_from_spec(rho)
    m = mmse(z, g)
    if g > 0:
        r = theorem3_derivative_check(rho, z, g)
        res = r.residual if r.status == CONVERGED else math.nan
    else:
        res = math.nan
    return g, m.value, res


def channel_table(z: D.Dist, gammas, rho: WeightFn2D = ONE, workers: int = 1) -> list[tuple]:
    """(gamma, M, derivative residual) per gamma, in input order."""
    # rho travels as its spec; the compiled closures do not pickle
    jobs = [(z, rho.source, float(g)) for g in gammas]
    if workers <= 1:
        return [_row(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_row, jobs))
