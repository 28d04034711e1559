import json
import re
from pathlib import Path

import pytest

from wepi_lab import distributions as D
from wepi_lab.cli import main
from wepi_lab.inequality import IneqVerdict, analyze
from wepi_lab.sweep import (CSV_HEADER, JOINT_COLORS, Axis, Cell, RegionMap, SweepSpec,
                            SweepSpecError, csv_rows, render_map, run_sweep, write_csv)
from wepi_lab.weights import weight_from_spec

ROOT = Path(__file__).resolve().parents[1]
GOLDEN = ROOT / "tests" / "golden" / "normal_wide_20x20.csv"


def small_spec(**kw):
    base = dict(dist1="normal:mu=0,sigma=1", dist2="normal:mu=0,sigma=1", weight="abs_x2_minus_2",
                axis1=Axis("dist1.sigma", 0.3, 1.5, 3), axis2=Axis("dist2.sigma", 0.3, 1.5, 2))
    base.update(kw)
    return SweepSpec(**base)


class TestSweepSpec:
    @pytest.mark.parametrize("kw,msg", [
        (dict(axis1=Axis("dist1.sigma", 0.3, 1.5, 1)), "steps"),
        (dict(axis1=Axis("dist1.sigma", 1.5, 0.3, 3)), "min"),
        (dict(axis1=Axis("dist3.sigma", 0.3, 1.5, 3)), "dist1"),
        (dict(axis1=Axis("dist1.beta", 0.3, 1.5, 3)), "beta"),
        (dict(weight="expr:sqrt(x"), "position"),
        (dict(weight="sqrt(x"), "unknown weight"),
        (dict(axis1=Axis("dist1.sigma", -1.0, 1.5, 3)), "sigma"),
    ])
    def test_invalid(self, kw, msg):
        with pytest.raises(ValueError, match=msg):
            small_spec(**kw).validate()

    def test_config_round_trip(self, tmp_path):
        cfg = {"dist1": "gamma:beta=1,lambda=1", "dist2": "gamma:beta=2,lambda=1",
               "weight": "x_exp_neg_x", "axis1": {"param": "dist1.beta", "min": 1, "max": 2, "steps": 2},
               "axis2": {"param": "dist2.beta", "min": 1, "max": 2, "steps": 3}, "seed": 4}
        p = tmp_path / "c.json"
        p.write_text(json.dumps(cfg))
        s = SweepSpec.load(p)
        assert s.axis2.steps == 3 and s.seed == 4 and s.weight == "x_exp_neg_x"

    @pytest.mark.parametrize("cfg", [{"dist1": "normal"}, [], {"axis1": 3}])
    def test_bad_config(self, tmp_path, cfg):
        p = tmp_path / "c.json"
        p.write_text(json.dumps(cfg))
        with pytest.raises(SweepSpecError):
            SweepSpec.load(p)

    def test_unknown_key(self, tmp_path):
        p = tmp_path / "c.json"
        cfg = json.loads((ROOT / "configs" / "normal_square.json").read_text())
        cfg["colour"] = "red"
        p.write_text(json.dumps(cfg))
        with pytest.raises(SweepSpecError, match="colour"):
            SweepSpec.load(p)


class TestRunSweep:
    def test_shape_and_order(self):
        m = run_sweep(small_spec())
        assert m.shape == (3, 2) and len(m.cells) == 6
        assert [(c.p1, c.p2) for c in m.cells][:2] == [(0.3, 0.3), (0.3, 1.5)]

    def test_failing_cell_is_inapplicable(self):
        # a cauchy axis with a polynomial weight diverges in every cell
        m = run_sweep(small_spec(dist1="cauchy:mu=0,theta=1", axis1=Axis("dist1.theta", 0.5, 1, 2)))
        assert m.count("wepi", "inapplicable") == 4
        assert all(not c.verdict.applicable and c.verdict.diagnostic for c in m.cells)

    def test_cells_match_standalone_check(self, capsys):
        m = run_sweep(small_spec())
        for c in m.cells:
            main(["check", "--dist1", f"normal:mu=0,sigma={c.p1!r}",
                  "--dist2", f"normal:mu=0,sigma={c.p2!r}", "--weight", "abs_x2_minus_2", "--json"])
            out = json.loads(capsys.readouterr().out)
            assert (out["wepi"], out["cond15"], out["wlsi"]) == \
                (c.verdict.wepi, c.verdict.cond15, c.verdict.wlsi)
            assert out["margin_wepi"] == c.verdict.margin_wepi


class TestCsv:
    def test_two_by_two(self, tmp_path):
        m = run_sweep(small_spec(axis1=Axis("dist1.sigma", 0.3, 1.5, 2)))
        text = write_csv(m, tmp_path / "m.csv").read_text()
        lines = text.splitlines()
        assert len(lines) == 5 and lines[0] == CSV_HEADER
        assert all(len(l.split(",")) == 13 for l in lines)

    def test_undecided_token(self):
        v = IneqVerdict(applicable=True, alpha=0.7, kappa=1.0, wepi_lhs=1.0, wepi_rhs=1.0,
                        wepi="undecided", margin_wepi=0.0, bound_wepi=1e-9, cond15="holds-ge",
                        wlsi_lhs=0.5, wlsi_rhs=0.5, wlsi="undecided", margin_wlsi=1e-12)
        m = RegionMap(Axis("dist1.sigma", 0, 1, 2), Axis("dist2.sigma", 0, 1, 2),
                      (Cell(0.0, 0.0, v),) * 4)
        row = csv_rows(m)[1].split(",")
        assert row[6] == "undecided" and row[7] == "holds" and row[11] == "0"
        assert float(row[12]) == 1e-12

    def test_byte_identical_reruns(self, tmp_path):
        a = write_csv(run_sweep(small_spec()), tmp_path / "a.csv").read_bytes()
        b = write_csv(run_sweep(small_spec()), tmp_path / "b.csv").read_bytes()
        assert a == b

    def test_worker_count_irrelevant(self, tmp_path):
        a = write_csv(run_sweep(small_spec(), workers=1), tmp_path / "a.csv").read_bytes()
        b = write_csv(run_sweep(small_spec(), workers=3), tmp_path / "b.csv").read_bytes()
        assert a == b


def _cells(svg: str):
    return [dict(re.findall(r'data-([\w-]+)="([^"]*)"', r))
            for r in re.findall(r'<rect class="cell"[^>]*/>', svg)]


class TestSvg:
    def test_all_holds(self, tmp_path):
        # phi = 1, two uniforms: every verdict holds
        spec = small_spec(dist1="uniform:a=0,b=1", dist2="uniform:a=0,b=1", weight="one",
                          axis1=Axis("dist1.b", 1, 2, 3), axis2=Axis("dist2.b", 1, 2, 3))
        svg = render_map(run_sweep(spec), tmp_path / "m.svg").read_text()
        rects = re.findall(r'<rect class="cell"[^>]*fill="([^"]+)"', svg)
        assert len(rects) == 9 and set(rects) == {JOINT_COLORS["+/+/+"]}
        assert "dist1.b [1, 2]" in svg and "dist2.b [1, 2]" in svg
        assert svg.count('class="legend"') == len(JOINT_COLORS)

    def test_inapplicable_hatched(self, tmp_path):
        m = run_sweep(small_spec())
        cells = list(m.cells)
        cells[4] = Cell(cells[4].p1, cells[4].p2, IneqVerdict(applicable=False, diagnostic="x"))
        svg = render_map(RegionMap(m.axis1, m.axis2, tuple(cells)), tmp_path / "m.svg").read_text()
        fills = re.findall(r'<rect class="cell"[^>]*fill="([^"]+)"', svg)
        assert fills.count("url(#hatch)") == 1 and fills[4] == "url(#hatch)"
        assert '<pattern id="hatch"' in svg

    def test_fail_mask_matches_csv(self, tmp_path):
        spec = SweepSpec.load(ROOT / "configs" / "normal_wide.json")
        m = run_sweep(spec)
        csv = write_csv(m, tmp_path / "w.csv").read_text().splitlines()[1:]
        svg = render_map(m, tmp_path / "w.svg").read_text()
        csv_fail = {(r.split(",")[0], r.split(",")[1]) for r in csv if r.split(",")[6] == "fails"}
        svg_fail = {(c["p1"], c["p2"]) for c in _cells(svg) if c["wepi"] == "fails"}
        assert csv_fail and csv_fail == svg_fail


class TestCli:
    def test_wde_text(self, capsys):
        assert main(["wde", "--dist", "normal:mu=0,sigma=1", "--weight", "x2"]) == 0
        out = capsys.readouterr().out
        assert "2.418938533" in out

    def test_wde_json_with_mc(self, capsys):
        assert main(["wde", "--dist", "exp:lambda=1", "--weight", "x_exp_neg_x", "--json",
                     "--mc-n", "100000", "--seed", "3"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["e_phi"]["value"] == pytest.approx(0.25)
        assert abs(out["mc"]["value"] - out["h"]["value"]) <= out["mc"]["error"]

    def test_wde_divergent(self, capsys):
        assert main(["wde", "--dist", "cauchy:mu=0,theta=1", "--weight", "x2"]) == 1
        assert "inapplicable" in capsys.readouterr().err

    def test_check_json(self, capsys):
        assert main(["check", "--dist1", "normal:mu=0,sigma=0.5505", "--dist2",
                     "normal:mu=0,sigma=0.5505", "--weight", "expr:abs(x^2 - 2)", "--json"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert (out["wepi"], out["wlsi"]) == ("holds", "fails")

    def test_channel_csv(self, tmp_path):
        p = tmp_path / "c.csv"
        assert main(["channel", "--dist", "normal:mu=0,sigma=1", "--gammas", "0,1", "--out", str(p)]) == 0
        lines = p.read_text().splitlines()
        assert lines[0] == "gamma,mmse,residual" and lines[2].startswith("1,0.5")

    @pytest.mark.parametrize("argv", [
        ["wde", "--dist", "normal:mu=0,sigma=-1"],
        ["wde", "--dist", "normal:mu=0,sigma=1", "--weight", "x +"],
        ["check", "--dist1", "bogus", "--dist2", "normal"],
        ["channel", "--dist", "cauchy:mu=0,theta=1"],
        ["channel", "--dist", "normal:mu=0,sigma=1", "--gammas", "a,b"],
        ["channel", "--dist", "normal:mu=0,sigma=1", "--rho", "nope"],
        ["sweep", "--dist1", "normal:mu=0,sigma=1"],
        ["sweep", "--config", "/nonexistent.json"],
    ])
    def test_spec_errors_exit_2(self, argv, capsys):
        assert main(argv) == 2
        assert "error" in capsys.readouterr().err

    def test_sweep_flags_and_config_override(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        data = json.loads((ROOT / "configs" / "normal_square.json").read_text())
        data.update(csv=str(tmp_path / "x.csv"), svg=None)
        cfg.write_text(json.dumps(data))
        out_csv = tmp_path / "y.csv"
        assert main(["sweep", "--config", str(cfg), "--csv", str(out_csv),
                     "--axis2", "dist2.sigma,0.55,0.551,2"]) == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["cells"] == 6 and summary["counts"]["wlsi"]["fails"] == 6
        assert len(out_csv.read_text().splitlines()) == 7
        assert not (tmp_path / "x.csv").exists()

    def test_sweep_inapplicable_cells_exit_0(self, tmp_path, capsys):
        assert main(["sweep", "--dist1", "cauchy:mu=0,theta=1", "--dist2", "cauchy:mu=0,theta=1",
                     "--weight", "x2", "--axis1", "dist1.theta,0.5,1,2",
                     "--axis2", "dist2.theta,0.5,1,2"]) == 0
        assert json.loads(capsys.readouterr().out)["counts"]["wepi"]["inapplicable"] == 4


def test_golden_wide_normal(tmp_path):
    spec = SweepSpec.load(ROOT / "configs" / "normal_wide.json")
    fresh = write_csv(run_sweep(spec), tmp_path / "w.csv").read_text().splitlines()
    golden = GOLDEN.read_text().splitlines()
    assert fresh[0] == golden[0]
    verdicts = lambda rows: [tuple(r.split(",")[i] for i in (0, 1, 6, 7, 10)) for r in rows[1:]]
    assert verdicts(fresh) == verdicts(golden)
    for a, b in zip(fresh[1:], golden[1:]):
        for x, y in zip(a.split(","), b.split(",")):
            if x not in ("holds", "fails", "undecided", "inapplicable"):
                assert float(x) == pytest.approx(float(y), rel=1e-9, abs=1e-12)
