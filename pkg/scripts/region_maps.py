"""Run the three region-map sweeps and print a verdict summary for each.

    python scripts/region_maps.py [--workers N] [--freeze]

``--freeze`` rewrites the golden CSV of the wide normal sweep.
"""
import argparse
from pathlib import Path

from wepi_lab.sweep import SweepSpec, render_map, run_sweep, write_csv

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ("normal_square", "gamma_square", "normal_wide")
GOLDEN = ROOT / "tests" / "golden" / "normal_wide_20x20.csv"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--freeze", action="store_true")
    args = ap.parse_args()
    for name in CONFIGS:
        spec = SweepSpec.load(ROOT / "configs" / f"{name}.json")
        m = run_sweep(spec, workers=args.workers)
        write_csv(m, ROOT / spec.csv)
        render_map(m, ROOT / spec.svg)
        joints = {}
        for c in m.cells:
            joints[c.joint] = joints.get(c.joint, 0) + 1
        print(f"{name:14s} {len(m.cells):4d} cells  " +
              "  ".join(f"{k}:{v}" for k, v in sorted(joints.items())))
        if name == "normal_wide" and args.freeze:
            write_csv(m, GOLDEN)
            print(f"froze {GOLDEN.relative_to(ROOT)}")


if __name__ == "__main__":
    main()
