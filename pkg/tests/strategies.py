"""Random instances shared by the property tests."""
import numpy as np
from hypothesis import strategies as st

from wepi_lab import distributions as D
from wepi_lab.weights import builtin_weight

WEIGHTS = ("one", "abs_x2_minus_2", "x_exp_neg_x", "x2", "exp_neg_x", "two_plus_cos")
POSITIVE_ONLY = {"x_exp_neg_x"}
PAIR_KINDS = ("normal", "gamma", "exp", "uniform", "cauchy", "gamma_uniform")


def _pos(rng, lo, hi):
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


def random_pair(rng: np.random.Generator):
    """Two laws whose sum has a closed-form density."""
    kind = PAIR_KINDS[rng.integers(len(PAIR_KINDS))]
    if kind == "normal":
        return D.Normal(rng.uniform(-1, 1), _pos(rng, 0.2, 3)), D.Normal(rng.uniform(-1, 1), _pos(rng, 0.2, 3))
    if kind == "gamma":
        lam = _pos(rng, 0.3, 3)
        return D.Gamma(_pos(rng, 0.3, 6), lam), D.Gamma(_pos(rng, 0.3, 6), lam)
    if kind == "exp":
        return D.Exponential(_pos(rng, 0.3, 3)), D.Exponential(_pos(rng, 0.3, 3))
    if kind == "uniform":
        a1, a2 = rng.uniform(-2, 2, size=2)
        return D.Uniform(a1, a1 + _pos(rng, 0.2, 3)), D.Uniform(a2, a2 + _pos(rng, 0.2, 3))
    if kind == "cauchy":
        return D.Cauchy(rng.uniform(-1, 1), _pos(rng, 0.2, 3)), D.Cauchy(rng.uniform(-1, 1), _pos(rng, 0.2, 3))
    a = rng.uniform(0, 2)
    return D.Gamma(_pos(rng, 0.5, 5), _pos(rng, 0.3, 3)), D.Uniform(a, a + _pos(rng, 0.2, 3))


def random_weight(rng: np.random.Generator, d1, d2):
    names = [w for w in WEIGHTS if not (w in POSITIVE_ONLY and min(d1.support[0], d2.support[0]) < 0)]
    return builtin_weight(names[rng.integers(len(names))])


def single_dists():
    """Hypothesis strategy over single laws with closed-form WDEs."""
    pos = st.floats(0.2, 4.0)
    return st.one_of(
        st.builds(D.Normal, st.floats(-2, 2), pos),
        st.builds(D.Gamma, st.floats(1.0, 6.0), pos),
        st.builds(D.Exponential, pos),
        st.builds(lambda a, L: D.Uniform(a, a + L), st.floats(-2, 2), pos),
        st.builds(D.Cauchy, st.floats(-2, 2), pos),
    )
