import numpy as np
import pytest

from wepi_lab import displays as S


def _assert_expected(checks):
    for c in checks:
        want = S.CORRECTED if c.name in S.DOCUMENTED else S.MATCHES
        assert c.verdict == want, (c.name, c.printed, c.corrected, c.reference)


def test_default_points():
    checks = S.all_checks()
    names = {c.name for c in checks}
    assert set(S.DOCUMENTED) <= names
    _assert_expected(checks)


def test_every_family_covered():
    fams = {c.family for c in S.all_checks()}
    assert fams == {"normal", "gamma", "exp", "uniform", "mixed", "cauchy", "logheavy"}


def _pos(rng, lo, hi):
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


SAMPLERS = {
    "normal": lambda r: S.normal_checks(_pos(r, 0.3, 2.5), _pos(r, 0.3, 2.5)),
    "gamma": lambda r: S.gamma_checks(_pos(r, 0.6, 5), _pos(r, 0.6, 5), _pos(r, 0.4, 3)),
    "exp": lambda r: S.exp_checks(_pos(r, 0.4, 3), _pos(r, 0.4, 3)),
    "uniform": lambda r: S.uniform_checks(*_uniforms(r)),
    "mixed": lambda r: S.mixed_checks(_pos(r, 1.0, 4), _pos(r, 0.5, 2), *_interval(r, 0.0)),
    "cauchy": lambda r: S.cauchy_checks(r.uniform(-1, 1), _pos(r, 0.3, 2), r.uniform(-1, 1),
                                        _pos(r, 0.3, 2)),
}


def _interval(rng, lo):
    a = rng.uniform(lo, lo + 1.5)
    return a, a + _pos(rng, 0.3, 2.5)


def _uniforms(rng):
    return (*_interval(rng, -1.0), *_interval(rng, -1.0))


@pytest.mark.parametrize("family", sorted(SAMPLERS))
def test_parameter_sample(family):
    rng = np.random.default_rng(sorted(SAMPLERS).index(family))
    for _ in range(20):
        _assert_expected(SAMPLERS[family](rng))


def test_verdict_states():
    c = S.DisplayCheck("x", printed=1.0, corrected=2.0, reference=2.0, tol=1e-9)
    assert c.verdict == S.CORRECTED
    assert S.DisplayCheck("x", 2.0, None, 2.0, 1e-9).verdict == S.MATCHES
    assert S.DisplayCheck("x", 1.0, 1.5, 2.0, 1e-9).verdict == S.MISMATCH
