import io
import json
from pathlib import Path

import numpy as np
import pytest

from cmsquad import cli, extremal, svgplot, weightfn
from cmsquad.figures import FIGURE_SET

GOLDEN = Path(__file__).parent / "golden"


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_compute_ramp(tmp_path):
    path = tmp_path / "ramp.csv"
    code, _, _ = run("compute", "--weight", "ramp", "--n", "5", "--grid", "1000", "--out", str(path))
    assert code == 0
    lines = path.read_text().splitlines()
    assert len(lines) == 999
    excluded = sum(line.endswith(",1") for line in lines[1:])
    assert 0 < excluded <= 9
    again = tmp_path / "again.csv"
    run("compute", "--weight", "ramp", "--n", "5", "--grid", "1000", "--out", str(again))
    assert path.read_bytes() == again.read_bytes()


def test_compute_trivial_to_stdout():
    code, out, _ = run("compute", "--weight", "constant", "--n", "1", "--grid", "50")
    assert code == 0
    rows = [r.split(",") for r in out.splitlines()[1:]]
    pi = np.array([float(r[1]) for r in rows])
    assert np.all((pi >= 0) & (pi <= 2)) and pi[-1] == 2.0


def test_weight_file(tmp_path):
    path = tmp_path / "w.json"
    weightfn.dump(weightfn.step_weight(), path)
    code, out, _ = run("compute", "--weight", str(path), "--n", "3", "--grid", "10")
    assert code == 0 and out.startswith("x,pi,")


@pytest.mark.parametrize(
    "argv",
    [
        ("verify", "--weight", "constant", "--suite", "bogus"),
        ("compute", "--weight", "missing.json"),
        ("compute", "--weight", "ramp", "--n", "0"),
        ("compute", "--weight", "ramp", "--grid", "1"),
        ("compute", "--weight", "ramp", "--n", "99"),
        ("plot", "--weight", "ramp", "--plot", "q_x", "--out", "x.svg"),
        ("plot", "--weight", "ramp", "--plot", "histogram", "--out", "x.svg"),
        ("frobnicate",),
    ],
)
def test_usage_errors_exit_2(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run(*argv)[0] == 2


def test_invalid_spec_exit_2(tmp_path):
    data = weightfn.to_dict(weightfn.ramp_weight())
    data["M"] = 4.0  # the ramp reaches 5
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    code, _, err = run("compute", "--weight", str(path))
    assert code == 2 and "w(t) > M" in err


def test_numerical_failure_exit_3(monkeypatch, tmp_path):
    monkeypatch.chdir(tmp_path)
    from cmsquad.errors import NumericalError

    def boom(*args, **kwargs):
        raise NumericalError("eigen-solve failed")

    monkeypatch.setattr(cli.orthopoly, "build_tables", boom)
    code, _, err = run("plot", "--weight", "ramp", "--plot", "phi-psi", "--out", "x.svg")
    assert code == 3 and "eigen-solve" in err


def test_verify_default_suite_passes(tmp_path):
    code, out, _ = run("verify", "--weight", "constant", "--n", "4,8,16", "--grid", "100", "--out", str(tmp_path))
    assert code == 0, out
    assert (tmp_path / "report.txt").read_text() == out
    assert (tmp_path / "report.csv").read_text().startswith("check,n,constant,value,passed,gating")


def test_verify_fault_injection_exit_1():
    code, out, _ = run("verify", "--weight", "constant", "--n", "4", "--grid", "40", "--suite", "cms", "--inject-fault", "1e-6")
    assert code == 1 and "FAIL" in out


def test_plot_is_a_view_of_its_csv(tmp_path):
    svg = tmp_path / "fam.svg"
    assert run("plot", "--weight", "ramp", "--n", "5", "--grid", "200", "--plot", "pi-family", "--out", str(svg))[0] == 0
    data = extremal.read_profile_csv(tmp_path / "fam.csv")
    series = svgplot.series_data(svg.read_text())
    np.testing.assert_array_equal(series["pi"][1], data["pi"])
    np.testing.assert_array_equal(series["pi_lower"][1], data["pi_lower"])
    prof = extremal.read_profile_csv(tmp_path / "fam.profile.csv")
    np.testing.assert_array_equal(series["pi"][1], prof["pi"])


def test_plot_from_existing_profile(tmp_path):
    prof = tmp_path / "p.csv"
    run("compute", "--weight", "step", "--n", "4", "--grid", "100", "--out", str(prof))
    svg = tmp_path / "lam.svg"
    assert run("plot", "--weight", "step", "--n", "4", "--plot", "lambda", "--profile", str(prof), "--out", str(svg))[0] == 0
    lam = svgplot.series_data(svg.read_text())["lambda"][1]
    np.testing.assert_array_equal(lam, extremal.read_profile_csv(prof)["lambda"])
    assert np.all(lam >= 0)


@pytest.mark.parametrize("job", FIGURE_SET, ids=lambda j: j.stem)
def test_figures_match_golden(job, tmp_path):
    assert cli.main(job.argv(tmp_path), stdout=io.StringIO()) == 0
    fresh = svgplot.canonical((tmp_path / f"{job.stem}.svg").read_text())
    assert fresh == (GOLDEN / f"{job.stem}.svg").read_text()
