"""Weight functions: a small expression language, built-ins, scaling and antiderivatives.

Grammar (Pratt precedences, loosest first)::

    + -      10  left
    * /      20  left
    unary -  30  prefix
    ^        40  right

Atoms are decimal literals, the variable(s) of the weight and the calls
``abs(.)``, ``exp(.)``, ``ln(.)``.  An expression is compiled twice: to a
``math``-based scalar closure (fast inside QUADPACK callbacks) and to a
numpy version for arrays.  Second derivatives come from forward-mode
differentiation over the same tree.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .numerics import Estimate, integrate

KINK_RADIUS = 1e-9

BOUNDED = "bounded"
POLYNOMIAL = "polynomial-growth"
DAMPED = "exponentially-damped"


class WeightSyntaxError(ValueError):
    def __init__(self, msg: str, text: str, pos: int):
        super().__init__(f"{msg} at position {pos}: {text!r}")
        self.text = text
        self.pos = pos


class WeightDomainError(ValueError):
    """A weight evaluated to NaN or to a negative number."""

    def __init__(self, source: str, x, value):
        super().__init__(f"weight {source} is not a nonnegative number at x={x!r} (got {value!r})")
        self.x = x
        self.value = value


class KinkError(ValueError):
    pass


# ---------------------------------------------------------------- syntax tree

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class Bin:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    name: str
    arg: object


FUNCTIONS = ("abs", "exp", "ln")
_BINARY = {"+": (10, "left"), "-": (10, "left"), "*": (20, "left"), "/": (20, "left"),
           "^": (40, "right")}
_UNARY_BP = 30

_TOKEN = re.compile(r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
                    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))")


def _tokenize(text: str):
    pos, out = 0, []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise WeightSyntaxError(f"unexpected character {text[start]!r}", text, start)
        start = m.start(m.lastgroup)
        out.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, variables: tuple[str, ...]):
        self.text = text
        self.variables = variables
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.next()
        if val != value:
            what = "end of input" if kind == "end" else repr(val)
            raise WeightSyntaxError(f"expected {value!r}, found {what}", self.text, pos)

    def parse(self):
        node = self.expr(0)
        kind, val, pos = self.peek()
        if kind != "end":
            raise WeightSyntaxError(f"unexpected {val!r}", self.text, pos)
        return node

    def expr(self, rbp: int):
        left = self.nud(self.next())
        while True:
            kind, val, pos = self.peek()
            if kind != "op" or val not in _BINARY:
                break
            bp, assoc = _BINARY[val]
            if bp <= rbp:
                break
            self.next()
            right = self.expr(bp - 1 if assoc == "right" else bp)
            left = Bin(val, left, right)
        return left

    def nud(self, tok):
        kind, val, pos = tok
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr(0)
                self.expect(")")
                return Call(val, arg)
            if val in self.variables:
                return Var(val)
            raise WeightSyntaxError(f"unknown identifier {val!r}", self.text, pos)
        if kind == "op" and val == "-":
            return Neg(self.expr(_UNARY_BP))
        if kind == "op" and val == "(":
            inner = self.expr(0)
            self.expect(")")
            return inner
        if kind == "end":
            raise WeightSyntaxError("unexpected end of input", self.text, pos)
        raise WeightSyntaxError(f"unexpected {val!r}", self.text, pos)


def parse_expr(text: str, variables: tuple[str, ...] = ("x",)):
    return _Parser(text, variables).parse()


def to_text(node) -> str:
    """Canonical, fully parenthesised form; parses back to the same tree."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_text(node.arg)})"
    if isinstance(node, Bin):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    return f"{node.name}({to_text(node.arg)})"


# ---------------------------------------------------------------- compilation

def _pow(a, b):
    try:
        return math.pow(a, b)
    except ValueError:
        return math.nan
    except OverflowError:
        return math.inf


def _exp(a):
    try:
        return math.exp(a)
    except OverflowError:
        return math.inf


def _ln(a):
    if a > 0:
        return math.log(a)
    return -math.inf if a == 0 else math.nan


def _div(a, b):
    if b == 0:
        return math.nan if a == 0 or a != a else math.copysign(math.inf, a)
    return a / b


_SCALAR_ENV = {"_pow": _pow, "_exp": _exp, "_ln": _ln, "_div": _div, "_abs": abs}
_VECTOR_ENV = {"_pow": np.power, "_exp": np.exp, "_ln": np.log, "_div": np.divide,
               "_abs": np.abs}


def _source(node) -> str:
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{_source(node.arg)})"
    if isinstance(node, Bin):
        l, r = _source(node.left), _source(node.right)
        if node.op == "^":
            return f"_pow({l}, {r})"
        if node.op == "/":
            return f"_div({l}, {r})"
        return f"({l} {node.op} {r})"
    return f"_{node.name}({_source(node.arg)})"


def _compile(node, variables, env):
    src = f"lambda {', '.join(variables)}: {_source(node)}"
    return eval(src, dict(env))  # noqa: S307 - source generated from our own tree


def _vector(node, variables):
    raw = _compile(node, variables, _VECTOR_ENV)

    def vec(*args):
        arrs = [np.asarray(a, dtype=float) for a in args]
        with np.errstate(all="ignore"):
            out = raw(*arrs)
        return np.broadcast_to(np.asarray(out, dtype=float), np.broadcast(*arrs).shape).copy()

    return vec


def _jet(node, x: float):
    """(value, first, second) derivative in x."""
    if isinstance(node, Num):
        return node.value, 0.0, 0.0
    if isinstance(node, Var):
        return x, 1.0, 0.0
    if isinstance(node, Neg):
        v, d, dd = _jet(node.arg, x)
        return -v, -d, -dd
    if isinstance(node, Call):
        a, da, dda = _jet(node.arg, x)
        if node.name == "exp":
            e = _exp(a)
            return e, e * da, e * (dda + da * da)
        if node.name == "ln":
            return _ln(a), da / a, (dda * a - da * da) / (a * a)
        if a == 0 or abs(a) <= KINK_RADIUS * abs(da):
            raise KinkError(f"abs() kink within {KINK_RADIUS:g} of x={x!r}")
        s = 1.0 if a > 0 else -1.0
        return s * a, s * da, s * dda
    a, da, dda = _jet(node.left, x)
    b, db, ddb = _jet(node.right, x)
    if node.op == "+":
        return a + b, da + db, dda + ddb
    if node.op == "-":
        return a - b, da - db, dda - ddb
    if node.op == "*":
        return a * b, da * b + a * db, dda * b + 2 * da * db + a * ddb
    if node.op == "/":
        q = a / b
        dq = (da - q * db) / b
        return q, dq, (dda - 2 * dq * db - q * ddb) / b
    # power
    if isinstance(node.right, Num):
        c = node.right.value
        v = _pow(a, c)
        d1 = c * _pow(a, c - 1) * da if c != 0 else 0.0
        d2 = (c * (c - 1) * _pow(a, c - 2) * da * da if c not in (0, 1) else 0.0) \
            + (c * _pow(a, c - 1) * dda if c != 0 else 0.0)
        return v, d1, d2
    # a^b = exp(b ln a)
    la, dla, ddla = _ln(a), da / a, (dda * a - da * da) / (a * a)
    g, dg = b * la, db * la + b * dla
    ddg = ddb * la + 2 * db * dla + b * ddla
    v = _pow(a, b)
    return v, v * dg, v * (ddg + dg * dg)


def _abs_args(node):
    if isinstance(node, Call):
        found = _abs_args(node.arg)
        return ([node.arg] + found) if node.name == "abs" else found
    if isinstance(node, Neg):
        return _abs_args(node.arg)
    if isinstance(node, Bin):
        return _abs_args(node.left) + _abs_args(node.right)
    return []


def _roots(vec, lo=-100.0, hi=100.0, n=20001):
    from scipy.optimize import brentq

    xs = np.linspace(lo, hi, n)
    ys = vec(xs)
    out = []
    for i in range(n - 1):
        y0, y1 = ys[i], ys[i + 1]
        if not (np.isfinite(y0) and np.isfinite(y1)):
            continue
        if y0 == 0:
            out.append(float(xs[i]))
        elif y0 * y1 < 0:
            out.append(brentq(lambda t: float(vec(np.array([t]))[0]), xs[i], xs[i + 1],
                              xtol=1e-15, rtol=1e-15))
    return out


# ---------------------------------------------------------------- weight types

def _decay_class(fn) -> str:
    """Classify by the tails where the weight is defined and nonnegative."""
    def val(x):
        try:
            v = fn(x)
        except (ArithmeticError, ValueError):
            return math.nan
        return v if v >= 0 else math.nan

    sides = [(val(s * 50.0), val(s * 500.0)) for s in (1.0, -1.0)]
    sides = [(a, b) for a, b in sides if not (math.isnan(a) or math.isnan(b))]
    if not sides:
        return BOUNDED
    if any(b > 2.0 * max(a, 1e-300) for a, b in sides):
        return POLYNOMIAL
    if all(a < 1e-12 and b < 1e-12 for a, b in sides):
        return DAMPED
    return BOUNDED


@dataclass(frozen=True)
class WeightFn:
    """Nonnegative weight x -> phi(x).

    Calling the object checks nonnegativity; ``vec`` maps arrays and checks
    too.  ``raw`` and ``raw_vec`` skip the check.
    """

    source: str
    raw: Callable[[float], float] = field(compare=False, repr=False)
    raw_vec: Callable = field(compare=False, repr=False)
    d2: Callable[[float], float] | None = field(default=None, compare=False, repr=False)
    decay: str = BOUNDED
    constant: float | None = None
    kinks: tuple[float, ...] = ()
    expr: object = field(default=None, compare=False, repr=False)

    def __call__(self, x: float) -> float:
        v = self.raw(x)
        if not v >= 0:
            raise WeightDomainError(self.source, x, v)
        return v

    def vec(self, x) -> np.ndarray:
        v = self.raw_vec(x)
        bad = ~(v >= 0)
        if bad.any():
            i = np.flatnonzero(bad)[0]
            xs = np.broadcast_to(np.asarray(x, dtype=float), v.shape).ravel()
            raise WeightDomainError(self.source, float(xs[i]), float(v.ravel()[i]))
        return v

    def second_derivative(self, x: float) -> float:
        if self.d2 is None:
            raise KinkError(f"weight {self.source} has no second derivative")
        for k in self.kinks:
            if abs(x - k) <= KINK_RADIUS * max(1.0, abs(k)):
                raise KinkError(f"x={x!r} lies at the kink {k!r} of {self.source}")
        return self.d2(x)


def weight_from_expr(text: str) -> WeightFn:
    node = parse_expr(text)
    fn = _compile(node, ("x",), _SCALAR_ENV)
    vec = _vector(node, ("x",))

    def d2(x, _node=node):
        return _jet(_node, float(x))[2]

    kinks = []
    for arg in _abs_args(node):
        kinks.extend(_roots(_vector(arg, ("x",))))
    constant = node.value if isinstance(node, Num) else None
    return WeightFn(source=to_text(node), raw=fn, raw_vec=vec, d2=d2, decay=_decay_class(fn),
                    constant=constant, kinks=tuple(sorted(set(kinks))), expr=node)


def parse_weight(text: str) -> WeightFn:
    return weight_from_expr(text)


def _renamed(w: WeightFn, name: str) -> WeightFn:
    return WeightFn(name, w.raw, w.raw_vec, w.d2, w.decay, w.constant, w.kinks, w.expr)


def _two_plus_cos() -> WeightFn:
    return WeightFn("two_plus_cos", raw=lambda x: 2.0 + math.cos(x),
                    raw_vec=lambda x: 2.0 + np.cos(np.asarray(x, dtype=float)),
                    d2=lambda x: -math.cos(x), decay=BOUNDED)


_BUILTIN_EXPR = {
    "one": "1",
    "abs_x2_minus_2": "abs(x^2 - 2)",
    "x_exp_neg_x": "x * exp(-x)",
    "x2": "x^2",
    "exp_neg_x": "exp(-x)",
}
BUILTINS = tuple(_BUILTIN_EXPR) + ("two_plus_cos",)


def builtin_weight(name: str) -> WeightFn:
    if name == "two_plus_cos":
        return _two_plus_cos()
    if name not in _BUILTIN_EXPR:
        raise ValueError(f"unknown weight {name!r}; built-ins are {', '.join(BUILTINS)}")
    w = weight_from_expr(_BUILTIN_EXPR[name])
    if name == "abs_x2_minus_2":
        w = WeightFn(w.source, w.raw, w.raw_vec, w.d2, w.decay, w.constant,
                     (-math.sqrt(2.0), math.sqrt(2.0)), w.expr)
    return _renamed(w, name)


def weight_from_spec(spec: str) -> WeightFn:
    """``one``, ``abs_x2_minus_2``, ``x_exp_neg_x`` (and other built-ins) or ``expr:<text>``."""
    spec = spec.strip()
    if spec.startswith("expr:"):
        return parse_weight(spec[5:])
    return builtin_weight(spec)


def scale_weight(w: WeightFn, c: float) -> WeightFn:
    """x -> phi(c x)."""
    c = float(c)
    if not c > 0 or not math.isfinite(c):
        raise ValueError(f"scale factor must be positive and finite, got {c!r}")
    if c == 1.0:
        return w
    raw, raw_vec, d2 = w.raw, w.raw_vec, w.d2
    return WeightFn(
        source=f"{w.source}@{c!r}",
        raw=lambda x: raw(c * x),
        raw_vec=lambda x: raw_vec(c * np.asarray(x, dtype=float)),
        d2=None if d2 is None else (lambda x: c * c * d2(c * x)),
        decay=w.decay,
        constant=w.constant,
        kinks=tuple(k / c for k in w.kinks),
    )


def weight_cumulative(w: WeightFn, x: float, tol: float = 1e-10) -> tuple[Estimate, Estimate]:
    """(Phi(x), Phi*(x)) = (int_0^x phi, int_0^x u phi(u) du); x may be +-inf."""
    if w.constant is not None and math.isfinite(x):
        c = w.constant
        return Estimate(c * x, 0.0), Estimate(c * x * x / 2, 0.0)
    phi = integrate(w, 0.0, x, tol, points=w.kinks)
    phis = integrate(lambda u: u * w(u), 0.0, x, tol, points=w.kinks)
    return phi, phis


# ---------------------------------------------------------------- two-variable weights

@dataclass(frozen=True)
class WeightFn2D:
    """rho(x, y) >= 0 with its y -> +inf and y -> -inf limits (functions of x)."""

    source: str
    raw: Callable[[float, float], float] = field(compare=False, repr=False)
    raw_vec: Callable = field(compare=False, repr=False)
    limit: WeightFn = field(compare=False)
    limit_neg: WeightFn = field(compare=False)
    y_free: bool = False  # rho(x, y) = limit(x) for every y

    def __call__(self, x: float, y: float) -> float:
        v = self.raw(x, y)
        if not v >= 0:
            raise WeightDomainError(self.source, (x, y), v)
        return v

    def vec(self, x, y) -> np.ndarray:
        v = self.raw_vec(x, y)
        if not (v >= 0).all():
            raise WeightDomainError(self.source, "array", float(v[~(v >= 0)].ravel()[0]))
        return v

    @property
    def constant(self) -> float | None:
        return self.limit.constant if self.y_free else None


def _const_weight(c: float) -> WeightFn:
    return weight_from_expr(repr(float(c)))


def rho_from_spec(spec: str) -> WeightFn2D:
    """``one``, ``two_plus_tanh_y``, ``weight:<weight spec>`` (rho = phi(x)) or
    ``expr:<text in x, y>`` (limits taken at |y| = 1e8)."""
    spec = spec.strip()
    if spec == "one":
        one = _const_weight(1.0)
        return WeightFn2D("one", lambda x, y: 1.0,
                          lambda x, y: np.ones(np.broadcast(np.asarray(x), np.asarray(y)).shape),
                          one, one, y_free=True)
    if spec == "two_plus_tanh_y":
        return WeightFn2D("two_plus_tanh_y", lambda x, y: 2.0 + math.tanh(y),
                          lambda x, y: 2.0 + np.tanh(np.asarray(y, dtype=float))
                          + 0.0 * np.asarray(x, dtype=float),
                          _const_weight(3.0), _const_weight(1.0))
    if spec.startswith("weight:"):
        w = weight_from_spec(spec[7:])
        return WeightFn2D(spec, lambda x, y: w.raw(x),
                          lambda x, y: w.raw_vec(np.asarray(x, dtype=float)
                                                 + 0.0 * np.asarray(y, dtype=float)),
                          w, w, y_free=True)
    if spec.startswith("expr:"):
        node = parse_expr(spec[5:], ("x", "y"))
        fn = _compile(node, ("x", "y"), _SCALAR_ENV)
        vec = _vector(node, ("x", "y"))
        big = 1e8

        def lim(sign):
            return WeightFn(f"lim {spec} y->{'+' if sign > 0 else '-'}inf",
                            raw=lambda x: fn(x, sign * big),
                            raw_vec=lambda x: vec(x, sign * big))

        return WeightFn2D(spec, fn, vec, lim(1.0), lim(-1.0))
    raise ValueError(f"unknown two-variable weight {spec!r}")
