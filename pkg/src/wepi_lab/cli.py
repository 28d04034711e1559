"""wepi-lab command line: wde, check, channel, sweep."""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import distributions as D
from .channel import channel_table
from .entropy import BOTH, CLOSED_FORM, QUADRATURE, MomentDivergence, wde
from .gaussian_noise import ChannelInputError
from .inequality import analyze
from .numerics import DEFAULT_TOL, Estimate, mc_expectation
from .sweep import Axis, SweepSpec, SweepSpecError, _num, render_map, run_sweep, write_csv
from .weights import WeightDomainError, WeightSyntaxError, rho_from_spec, weight_from_spec

# all input-validation errors derive from ValueError
SPEC_ERRORS = (D.DistributionError, WeightSyntaxError, WeightDomainError, SweepSpecError,
               ChannelInputError, ValueError, KeyError)


def _jsonable(obj):
    if isinstance(obj, Estimate):
        return {"value": obj.value, "error": obj.error, "status": obj.status}
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def _dump(d: dict) -> str:
    clean = {k: _jsonable(v) for k, v in d.items()}
    return json.dumps(clean, sort_keys=True, allow_nan=False, default=str)


def cmd_wde(args) -> int:
    d = D.make_dist(args.dist)
    w = weight_from_spec(args.weight)
    try:
        rep = wde(d, w, args.method, args.tol)
    except MomentDivergence as exc:
        print(f"inapplicable: {exc}", file=sys.stderr)
        return 1
    out = rep.as_dict()
    out.update(dist=args.dist, weight=args.weight)
    if args.mc_n:
        def g(x):
            return w.vec(x) * -np.asarray(d.logpdf(x))
        out["mc"] = mc_expectation(d, g, args.mc_n, args.seed)
    if args.json:
        print(_dump(out))
    else:
        for k, v in out.items():
            if isinstance(v, dict):
                v = f"{v['value']:.12g} +- {v['error']:.2g} ({v['status']})"
            elif isinstance(v, Estimate):
                v = f"{v.value:.12g} +- {v.error:.2g} ({v.status})"
            print(f"{k:14s} {v}")
    return 0


def cmd_check(args) -> int:
    v = analyze(D.make_dist(args.dist1), D.make_dist(args.dist2), weight_from_spec(args.weight),
                args.tol)
    out = v.as_dict()
    out.update(dist1=args.dist1, dist2=args.dist2, weight=args.weight)
    if args.json:
        print(_dump(out))
    else:
        for k, val in out.items():
            print(f"{k:14s} {val}")
    return 0


def cmd_channel(args) -> int:
    z = D.make_dist(args.dist)
    rho = rho_from_spec(args.rho)
    try:
        gammas = [float(g) for g in args.gammas.split(",") if g.strip()]
    except ValueError:
        raise SweepSpecError(f"--gammas: not a comma-separated list of numbers: {args.gammas!r}")
    if not gammas or any(g < 0 for g in gammas):
        raise SweepSpecError("--gammas: need at least one value, all >= 0")
    rows = channel_table(z, gammas, rho, workers=args.workers)
    lines = ["gamma,mmse,residual"] + [",".join(_num(v) for v in r) for r in rows]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_sweep(args) -> int:
    spec = SweepSpec.load(args.config) if args.config else None
    if spec is None:
        need = ("dist1", "dist2", "weight", "axis1", "axis2")
        missing = [n for n in need if getattr(args, n) is None]
        if missing:
            raise SweepSpecError(f"without --config these flags are required: {', '.join(missing)}")
    axes = {}
    for name in ("axis1", "axis2"):
        raw = getattr(args, name)
        if raw is not None:
            try:
                param, lo, hi, steps = raw.split(",")
                axes[name] = Axis(param.strip(), float(lo), float(hi), int(steps))
            except ValueError:
                raise SweepSpecError(f"--{name}: expected PARAM,MIN,MAX,STEPS, got {raw!r}") from None
    over = dict(dist1=args.dist1, dist2=args.dist2, weight=args.weight, tol=args.tol,
                seed=args.seed, workers=args.workers, csv=args.csv, svg=args.svg, **axes)
    if spec is None:
        spec = SweepSpec(**{k: v for k, v in over.items() if v is not None})
    else:
        spec = spec.override(**over)
    spec.validate()
    m = run_sweep(spec)
    if spec.csv:
        write_csv(m, spec.csv)
    if spec.svg:
        render_map(m, spec.svg)
    counts = {k: {t: m.count(k, t) for t in ("holds", "fails", "undecided", "inapplicable")}
              for k in ("wepi", "cond15", "wlsi")}
    print(json.dumps({"cells": len(m.cells), "counts": counts, "csv": spec.csv, "svg": spec.svg},
                     sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wepi-lab",
                                description="Weighted entropy, WEPI verdicts and Gaussian-channel checks.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="relative quadrature tolerance")
    common.add_argument("--seed", type=int, default=None, help="64-bit seed for Monte-Carlo draws")
    common.add_argument("--json", action="store_true", help="emit one JSON object")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("wde", parents=[common], help="weighted differential entropy of one law")
    s.add_argument("--dist", required=True)
    s.add_argument("--weight", default="one")
    s.add_argument("--method", choices=(QUADRATURE, CLOSED_FORM, BOTH), default=BOTH)
    s.add_argument("--mc-n", type=int, default=0, help="add a Monte-Carlo estimate with n draws")
    s.set_defaults(func=cmd_wde)

    s = sub.add_parser("check", parents=[common], help="WEPI, condition and WLSI at one point")
    s.add_argument("--dist1", required=True)
    s.add_argument("--dist2", required=True)
    s.add_argument("--weight", default="one")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("channel", parents=[common], help="MMSE curve and derivative residuals")
    s.add_argument("--dist", required=True)
    s.add_argument("--rho", default="one")
    s.add_argument("--gammas", default="0,0.1,1,10,100")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", default=None, help="CSV path (default stdout)")
    s.set_defaults(func=cmd_channel)

    s = sub.add_parser("sweep", parents=[common], help="region map over a parameter grid")
    s.add_argument("--config", default=None, help="JSON file mirroring the sweep spec")
    s.add_argument("--dist1")
    s.add_argument("--dist2")
    s.add_argument("--weight")
    s.add_argument("--axis1", help="PARAM,MIN,MAX,STEPS, e.g. dist1.sigma,0.2,2,20")
    s.add_argument("--axis2")
    s.add_argument("--workers", type=int, default=None)
    s.add_argument("--csv", default=None)
    s.add_argument("--svg", default=None)
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command != "sweep":
        args.tol = DEFAULT_TOL if args.tol is None else args.tol
        args.seed = 0 if args.seed is None else args.seed
    try:
        return args.func(args)
    except SPEC_ERRORS as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) else exc
        print(f"wepi-lab: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
