import csv
import io
import json
import re
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from ridgeinfluence import cli
from ridgeinfluence.errors import InputError, LeverageOne
from ridgeinfluence.ingest import bundled_bodyfat_text
from ridgeinfluence.pipeline import AnalysisConfig, boundary_counts, run_analysis, write_outputs

SVG = "{http://www.w3.org/2000/svg}"


@pytest.fixture(scope="module")
def bundle():
    return run_analysis(AnalysisConfig(plots=()))


@pytest.fixture(scope="module")
def outputs(bundle, tmp_path_factory):
    out = tmp_path_factory.mktemp("analysis")
    paths = write_outputs(bundle, AnalysisConfig(), out)
    return paths


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def curve_points(svg_path, label):
    root = ET.parse(svg_path).getroot()
    for g in root.iter(SVG + "g"):
        if g.get("id") == label:
            (path,) = list(g.iter(SVG + "path"))
            nums = [float(v) for v in re.findall(r"-?\d+\.?\d*", path.get("d"))]
            return np.array(nums).reshape(-1, 2), path.get("style")
    return None, None


def test_bundle_contents(bundle):
    assert len(bundle.curves) == 252 and len(bundle.reports) == 252
    assert bundle.metadata["p"] == 12
    assert not bundle.metadata["intercept_per_fold"]
    assert bundle.highlighted(None, 2) == [38, 220]
    assert bundle.highlighted(["39", "1"]) == [38, 0]
    with pytest.raises(InputError):
        bundle.highlighted(["999"])
    counts = boundary_counts(bundle)
    assert sum(counts.values()) == 252 * 81 and counts["at_zero"] > 0


def test_config_validation():
    with pytest.raises(InputError):
        AnalysisConfig(input_format="xlsx")
    with pytest.raises(InputError):
        AnalysisConfig(plots=("pie",))
    with pytest.raises(InputError):
        AnalysisConfig(intercept="sometimes")
    with pytest.raises(InputError):
        AnalysisConfig(step=0.0)


def test_output_files(outputs):
    curves = read_csv(outputs["curves"])
    assert len(curves) == 252 * 81
    report = read_csv(outputs["report"])
    first = sorted(report, key=lambda r: int(r["rank"]))[:2]
    assert [(r["observation"], r["label"]) for r in first] == [("39", "expander"), ("221", "shrinker")]
    meta = json.loads(outputs["manifest"].read_text())
    assert meta["n"] == 252 and meta["boundary"] == "interior"
    assert len(read_csv(outputs["cv"])) > 100


def test_lambda_plot_structure(outputs):
    svg = outputs["lambda_plot"]
    root = ET.parse(svg).getroot()
    ids = [g.get("id") for g in root.iter(SVG + "g") if (g.get("id") or "").startswith("curve-")]
    assert len(ids) == 252 and len(set(ids)) == 252
    ref, _ = curve_points(svg, "reference-t1")
    x1 = ref[0, 0]
    assert np.allclose(ref[:, 0], x1)
    pts, style = curve_points(svg, "curve-39")
    assert "stroke-width: 2.2" in style
    # svg y grows downward: the expander sits below the meeting point for t > 1
    k = int(np.argmin(np.abs(pts[:, 0] - x1)))
    assert np.all(pts[k + 1:, 1] > pts[k, 1])
    grey, grey_style = curve_points(svg, "curve-1")
    assert "stroke-width: 0.6" in grey_style
    assert grey[k, 1] == pytest.approx(pts[k, 1], abs=0.05)


def test_df_plot_shrinker_falls(outputs):
    svg = outputs["df_plot"]
    ref, _ = curve_points(svg, "reference-t1")
    pts, _ = curve_points(svg, "curve-221")
    k = int(np.argmin(np.abs(pts[:, 0] - ref[0, 0])))
    assert np.all(np.diff(pts[k:, 1]) >= 0) and pts[-1, 1] > pts[k, 1]


def test_pc_plot_lines(outputs):
    root = ET.parse(outputs["pc_plot"]).getroot()
    ids = {g.get("id") for g in root.iter(SVG + "g")}
    assert {"regression-line", "mean-line", "points"} <= ids


def test_runs_are_byte_identical(tmp_path):
    for name in ("a", "b"):
        assert cli.main(["analyze", "--out", str(tmp_path / name), "--plots", "lambda"]) == 0
    for f in ("curves.csv", "report.csv", "cv.csv", "plots/lambda_curves.svg"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_cli_bad_input_exit_code(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert cli.main(["cv", str(empty), "--outcome", "y"]) == 2
    assert cli.main(["cv", str(tmp_path / "missing.csv"), "--outcome", "y"]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("y,a\n1,2\n2,x\n3,1\n")
    assert cli.main(["cv", str(bad), "--outcome", "y"]) == 2
    assert "error" in capsys.readouterr().err


def test_cli_numerical_exit_code(monkeypatch, tmp_path):
    def fail(*args, **kwargs):
        raise LeverageOne(3)

    monkeypatch.setattr(cli, "run_analysis", fail)
    assert cli.main(["analyze", "--out", str(tmp_path)]) == 3


def test_cli_cv_and_curve(tmp_path, capsys):
    assert cli.main(["cv", "--out", str(tmp_path)]) == 0
    assert "lambda_cv=0.4923" in capsys.readouterr().out
    out = tmp_path / "c39.csv"
    assert cli.main(["curve", "--obs", "39", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 81 and rows[-1]["flag"] == "at_zero"
    assert cli.main(["curve", "--obs", "900"]) == 2


@pytest.mark.filterwarnings("ignore::ridgeinfluence.weighted.CurveJumpWarning")
def test_cli_csv_input(tmp_path, capsys):
    rng = np.random.default_rng(0)
    X = rng.normal(size=(30, 3))
    y = X @ [1.0, -0.5, 0.2] + rng.normal(size=30)
    path = tmp_path / "d.csv"
    with open(path, "w") as fh:
        fh.write("id,a,b,c,resp\n")
        for k in range(30):
            fh.write(f"r{k},{X[k,0]},{X[k,1]},{X[k,2]},{y[k]}\n")
    out = tmp_path / "o"
    code = cli.main(["analyze", str(path), "--outcome", "resp", "--row-labels", "id",
                     "--out", str(out), "--plots", ""])
    assert code == 0
    report = read_csv(out / "report.csv")
    assert report[0]["observation"] == "r0" and len(report) == 30


def test_cli_univariate_report_has_nominator(tmp_path):
    rng = np.random.default_rng(1)
    x = rng.normal(size=25)
    y = 0.4 * x + rng.normal(size=25)
    path = tmp_path / "u.csv"
    path.write_text("x,y\n" + "".join(f"{a},{b}\n" for a, b in zip(x, y)))
    assert cli.main(["analyze", str(path), "--outcome", "y", "--out", str(tmp_path / "o"), "--plots", ""]) == 0
    report = read_csv(tmp_path / "o" / "report.csv")
    assert report[0]["boundary_derived"] == "0"
    for r in report:
        assert (float(r["nominator_factor"]) < 0) == (r["label"] == "expander")


def test_cli_simulate(tmp_path, capsys):
    assert cli.main(["simulate", "--list"]) == 0
    assert "two-expanders" in capsys.readouterr().out
    out = tmp_path / "sim"
    assert cli.main(["simulate", "--scenario", "expander-shrinker", "--seed", "0",
                     "--out", str(out), "--plots", "lambda"]) == 0
    truth = read_csv(out / "truth.csv")
    report = {r["observation"]: r for r in read_csv(out / "report.csv")}
    for t in truth:
        assert report[t["observation"]]["label"] == t["role"]
        assert int(report[t["observation"]]["rank"]) <= 2
    again = tmp_path / "again"
    assert cli.main(["simulate", "--config", str(out / "scenario.ini"), "--out", str(again), "--no-analyze"]) == 0
    assert (again / "simulated.csv").read_bytes() == (out / "simulated.csv").read_bytes()
    assert cli.main(["simulate", "--out", str(tmp_path / "x")]) == 2


def test_cli_simulate_with_covariate_file(tmp_path):
    rng = np.random.default_rng(2)
    X = rng.normal(size=(20, 30))
    path = tmp_path / "cov.csv"
    path.write_text(",".join(f"g{k}" for k in range(30)) + "\n"
                    + "".join(",".join(map(str, row)) + "\n" for row in X))
    out = tmp_path / "sim"
    assert cli.main(["simulate", "--scenario", "2", "--covariates", str(path), "--out", str(out),
                     "--plots", ""]) == 0
    assert len(read_csv(out / "report.csv")) == 19


def test_cli_fetch_offline(tmp_path):
    local = tmp_path / "fat.dat"
    local.write_text(bundled_bodyfat_text())
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(["fetch-bodyfat", "--local", str(local), "--out", str(a)]) == 0
    assert cli.main(["fetch-bodyfat", "--bundled", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 253
    assert cli.main(["fetch-bodyfat", "--url", "http://127.0.0.1:9/none", "--timeout", "1",
                     "--out", str(tmp_path / "c.csv")]) == 2


def test_fetched_csv_reanalyzes_identically(tmp_path, bundle):
    path = tmp_path / "fat.csv"
    assert cli.main(["fetch-bodyfat", "--bundled", "--out", str(path)]) == 0
    cfg = AnalysisConfig(input=str(path), input_format="csv", outcome="BodyFat", drop=("Age", "Density"), plots=())
    other = run_analysis(cfg)
    assert other.metadata["lambda_cv"] == bundle.metadata["lambda_cv"]


def test_summary_lines(bundle):
    buf = io.StringIO()
    cli._print_summary(bundle, buf)
    lines = buf.getvalue().splitlines()
    assert lines[1].startswith("  obs 39: expander")
