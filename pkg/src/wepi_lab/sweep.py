"""Parameter-grid sweeps: config, parallel evaluation, CSV and SVG output."""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from html import escape
from pathlib import Path

import numpy as np

from . import distributions as D
from .inequality import HOLDS, INAPPLICABLE, UNDECIDED, IneqVerdict, analyze
from .numerics import DEFAULT_TOL
from .weights import weight_from_spec

CSV_HEADER = ("p1,p2,alpha,kappa,wepi_lhs,wepi_rhs,wepi,cond15,wlsi_lhs,wlsi_rhs,wlsi,"
              "margin_wepi,margin_wlsi")


class SweepSpecError(ValueError):
    pass


@dataclass(frozen=True)
class Axis:
    param: str          # "dist1.sigma", "dist2.beta", ...
    lo: float
    hi: float
    steps: int

    @property
    def target(self) -> str:
        return self.param.split(".", 1)[0]

    @property
    def key(self) -> str:
        return self.param.split(".", 1)[1]

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.steps)


@dataclass(frozen=True)
class SweepSpec:
    dist1: str
    dist2: str
    weight: str
    axis1: Axis
    axis2: Axis
    tol: float = DEFAULT_TOL
    seed: int = 0
    workers: int = 1
    csv: str | None = None
    svg: str | None = None

    def validate(self) -> "SweepSpec":
        for ax in (self.axis1, self.axis2):
            if ax.steps < 2:
                raise SweepSpecError(f"{ax.param}: steps must be >= 2")
            if not ax.lo < ax.hi:
                raise SweepSpecError(f"{ax.param}: min must be < max")
            if "." not in ax.param or ax.target not in ("dist1", "dist2"):
                raise SweepSpecError(f"{ax.param}: expected dist1.<param> or dist2.<param>")
            base = self.dist1 if ax.target == "dist1" else self.dist2
            family = base.partition(":")[0].strip()
            if family not in D._PARAMS:
                raise SweepSpecError(f"{ax.param}: family {family!r} has no sweepable parameters")
            if ax.key not in D._PARAMS[family][1]:
                raise SweepSpecError(f"{ax.param}: {family} has no parameter {ax.key!r}; "
                                     f"expected {', '.join(D._PARAMS[family][1])}")
        if not self.tol > 0:
            raise SweepSpecError("tol must be positive")
        # every corner must build
        for v1 in (self.axis1.lo, self.axis1.hi):
            for v2 in (self.axis2.lo, self.axis2.hi):
                d1, d2 = self.cell_specs(v1, v2)
                D.make_dist(d1)
                D.make_dist(d2)
        weight_from_spec(self.weight)
        return self

    def cell_specs(self, v1: float, v2: float) -> tuple[str, str]:
        specs = {"dist1": self.dist1, "dist2": self.dist2}
        for ax, v in ((self.axis1, v1), (self.axis2, v2)):
            specs[ax.target] = _with_param(specs[ax.target], ax.key, v)
        return specs["dist1"], specs["dist2"]

    @classmethod
    def from_dict(cls, cfg: dict) -> "SweepSpec":
        try:
            axes = [Axis(str(a["param"]), float(a["min"]), float(a["max"]), int(a["steps"]))
                    for a in (cfg["axis1"], cfg["axis2"])]
            known = {"dist1", "dist2", "weight", "axis1", "axis2", "tol", "seed", "workers",
                     "csv", "svg"}
            extra = set(cfg) - known
            if extra:
                raise SweepSpecError(f"unknown config keys: {', '.join(sorted(extra))}")
            return cls(str(cfg["dist1"]), str(cfg["dist2"]), str(cfg["weight"]), axes[0], axes[1],
                       float(cfg.get("tol", DEFAULT_TOL)), int(cfg.get("seed", 0)),
                       int(cfg.get("workers", 1)), cfg.get("csv"), cfg.get("svg"))
        except KeyError as exc:
            raise SweepSpecError(f"missing config key {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, SweepSpecError):
                raise
            raise SweepSpecError(f"malformed config: {exc}") from None

    @classmethod
    def load(cls, path) -> "SweepSpec":
        try:
            cfg = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise SweepSpecError(f"{path}: not valid JSON ({exc})") from None
        except OSError as exc:
            raise SweepSpecError(f"cannot read config {path}: {exc.strerror}") from None
        if not isinstance(cfg, dict):
            raise SweepSpecError(f"{path}: top level must be an object")
        return cls.from_dict(cfg)

    def override(self, **kw) -> "SweepSpec":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def _with_param(spec: str, key: str, value: float) -> str:
    family, _, rest = spec.partition(":")
    items = [s.strip() for s in rest.split(",") if s.strip()]
    items = [s for s in items if s.partition("=")[0].strip() != key]
    items.append(f"{key}={value!r}")
    return f"{family.strip()}:{','.join(items)}"


@dataclass(frozen=True)
class Cell:
    p1: float
    p2: float
    verdict: IneqVerdict

    @property
    def joint(self) -> str:
        v = self.verdict
        flags = (v.wepi, v.cond15_flag, v.wlsi)
        if INAPPLICABLE in flags:
            return INAPPLICABLE
        if UNDECIDED in flags:
            return UNDECIDED
        return "/".join("+" if f == HOLDS else "-" for f in flags)


@dataclass(frozen=True)
class RegionMap:
    axis1: Axis
    axis2: Axis
    cells: tuple = field(default=())    # row-major: axis1 outer, axis2 inner

    @property
    def shape(self) -> tuple[int, int]:
        return self.axis1.steps, self.axis2.steps

    def grid(self, attr: str) -> np.ndarray:
        vals = [getattr(c.verdict, attr) if attr != "cond15" else c.verdict.cond15_flag
                for c in self.cells]
        return np.array(vals, dtype=object).reshape(self.shape)

    def count(self, attr: str, value: str) -> int:
        return int(np.sum(self.grid(attr) == value))


@lru_cache(maxsize=8)
def _weight(spec: str):
    return weight_from_spec(spec)


def evaluate_cell(job) -> Cell:
    """Evaluate one grid point; any failure becomes an inapplicable cell."""
    p1, p2, s1, s2, wspec, tol = job
    try:
        v = analyze(D.make_dist(s1, check=False), D.make_dist(s2, check=False), _weight(wspec), tol)
    except Exception as exc:  # per-cell failures never abort the sweep
        v = IneqVerdict(applicable=False, diagnostic=f"{type(exc).__name__}: {exc}")
    return Cell(p1, p2, v)


def run_sweep(spec: SweepSpec, workers: int | None = None) -> RegionMap:
    spec.validate()
    n = spec.workers if workers is None else workers
    jobs = []
    for v1 in spec.axis1.values():
        for v2 in spec.axis2.values():
            s1, s2 = spec.cell_specs(float(v1), float(v2))
            jobs.append((float(v1), float(v2), s1, s2, spec.weight, spec.tol))
    if n <= 1:
        cells = [evaluate_cell(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n) as ex:
            cells = list(ex.map(evaluate_cell, jobs, chunksize=max(1, len(jobs) // (4 * n))))
    return RegionMap(spec.axis1, spec.axis2, tuple(cells))


def _num(v: float) -> str:
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.12g}"


def csv_rows(m: RegionMap) -> list[str]:
    out = [CSV_HEADER]
    for c in m.cells:
        v = c.verdict
        out.append(",".join([
            _num(c.p1), _num(c.p2), _num(v.alpha), _num(v.kappa), _num(v.wepi_lhs),
            _num(v.wepi_rhs), v.wepi, v.cond15_flag, _num(v.wlsi_lhs), _num(v.wlsi_rhs), v.wlsi,
            _num(v.margin_wepi), _num(v.margin_wlsi)]))
    return out


def write_csv(m: RegionMap, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(csv_rows(m)) + "\n")
    return path


# -- SVG

JOINT_COLORS = {
    "+/+/+": "#1a9850",
    "+/+/-": "#91cf60",
    "+/-/+": "#66bd63",
    "+/-/-": "#d9ef8b",
    "-/+/+": "#000000",   # would contradict the sufficiency claim
    "-/+/-": "#fc8d59",
    "-/-/+": "#f46d43",
    "-/-/-": "#d73027",
    UNDECIDED: "#bdbdbd",
    INAPPLICABLE: "url(#hatch)",
}


def _label(key: str) -> str:
    if key in (UNDECIDED, INAPPLICABLE):
        return key
    names = ("wepi", "cond15", "wlsi")
    return ", ".join(f"{n} {'holds' if s == '+' else 'fails'}" for n, s in zip(names, key.split("/")))


def render_map(m: RegionMap, path, cell_px: int = 24) -> Path:
    """Heatmap with axis1 horizontal, axis2 vertical (increasing upwards)."""
    n1, n2 = m.shape
    left, top, right = 80, 30, 300
    W, H = n1 * cell_px, n2 * cell_px
    width, height = left + W + right, top + H + 70
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="11">',
        '<defs><pattern id="hatch" width="6" height="6" patternUnits="userSpaceOnUse" '
        'patternTransform="rotate(45)"><rect width="6" height="6" fill="#ffffff"/>'
        '<line x1="0" y1="0" x2="0" y2="6" stroke="#7b3294" stroke-width="2"/></pattern></defs>',
    ]
    for idx, c in enumerate(m.cells):
        i, j = divmod(idx, n2)
        x = left + i * cell_px
        y = top + (n2 - 1 - j) * cell_px
        v = c.verdict
        parts.append(
            f'<rect class="cell" x="{x}" y="{y}" width="{cell_px}" height="{cell_px}" '
            f'fill="{JOINT_COLORS[c.joint]}" stroke="#ffffff" stroke-width="0.5" '
            f'data-i="{i}" data-j="{j}" data-p1="{_num(c.p1)}" data-p2="{_num(c.p2)}" '
            f'data-verdict="{escape(c.joint)}" data-wepi="{v.wepi}" '
            f'data-cond15="{v.cond15_flag}" data-wlsi="{v.wlsi}"/>')
    a1, a2 = m.axis1, m.axis2
    parts += [
        f'<text x="{left + W / 2}" y="{top + H + 40}" text-anchor="middle">'
        f'{escape(a1.param)} [{_num(a1.lo)}, {_num(a1.hi)}]</text>',
        f'<text x="{left - 50}" y="{top + H / 2}" text-anchor="middle" '
        f'transform="rotate(-90 {left - 50} {top + H / 2})">'
        f'{escape(a2.param)} [{_num(a2.lo)}, {_num(a2.hi)}]</text>',
        f'<text x="{left}" y="{top + H + 16}" text-anchor="middle">{_num(a1.lo)}</text>',
        f'<text x="{left + W}" y="{top + H + 16}" text-anchor="middle">{_num(a1.hi)}</text>',
        f'<text x="{left - 6}" y="{top + H}" text-anchor="end">{_num(a2.lo)}</text>',
        f'<text x="{left - 6}" y="{top + 10}" text-anchor="end">{_num(a2.hi)}</text>',
    ]
    lx = left + W + 20
    for k, (key, color) in enumerate(JOINT_COLORS.items()):
        y = top + k * 18
        parts.append(f'<rect class="legend" x="{lx}" y="{y}" width="12" height="12" fill="{color}" '
                     f'stroke="#444444" stroke-width="0.5" data-verdict="{escape(key)}"/>')
        parts.append(f'<text x="{lx + 18}" y="{y + 10}">{escape(_label(key))}</text>')
    parts.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(parts) + "\n")
    return path
