"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

    pytest tests/test_acceptance.py -v
"""

import io
import math
import time
from pathlib import Path

import numpy as np
import pytest

from cmsquad import canonical, cli, extremal, orthopoly, svgplot, weightfn
from cmsquad.figures import FIGURE_SET
from cmsquad.verify import checks, oracles
from cmsquad.verify.report import stable

SPECS = {"constant": weightfn.constant_weight(), "ramp": weightfn.ramp_weight(), "step": weightfn.step_weight()}
GOLDEN = Path(__file__).parent / "golden"
_profiles = {}


def profile(name, n, grid):
    key = (name, n, grid)
    if key not in _profiles:
        _profiles[key] = extremal.profile(SPECS[name], n, grid)
    return _profiles[key]


def test_1_quadrature_exactness(criterion):
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = (0.0, None)
    for name, spec in SPECS.items():
        for n in range(1, 17):
            tables = orthopoly.build_tables(spec, n)
            for x in rng.uniform(-0.999, 0.999, 50):
                r = canonical.exactness_residual(canonical.rep_of_x(tables, x), tables)
                if r > worst[0]:
                    worst = (r, (name, n, float(x)))
    elapsed = time.perf_counter() - start
    ok = worst[0] <= 1e-8 and elapsed < 60
    criterion(1, ok, f"max exactness residual {worst[0]:.2e} at {worst[1]} (tol 1e-8); runtime {elapsed:.1f}s (< 60s)")
    assert ok


def test_2_cms_sandwich_and_identity(criterion):
    worst = 0.0
    for name in SPECS:
        for n in (4, 8):
            prof = profile(name, n, 1000)
            assert all(s.ok for s in prof.samples)
            _, viol = checks.cms_violation(prof)
            worst = max(worst, float(viol.max()) / prof.mass)
    ok = worst <= 1e-9
    criterion(2, ok, f"max sandwich/identity violation {worst:.2e} x mass (tol 1e-9 x mass), 3 specs, n in {{4, 8}}, 1000-point grids")
    assert ok


def test_3_derivative_matches_finite_differences(criterion):
    fractions = {}
    for name, spec in SPECS.items():
        for n in (4, 8):
            tables = orthopoly.build_tables(spec, n)
            prof = profile(name, n, 1000)
            good = [s for s in prof.samples if not s.excluded]
            hits = sum(abs(oracles.finite_difference_pi_prime(tables, s.x, 1e-5) - s.pi_prime) <= 1e-4 for s in good)
            fractions[(name, n)] = hits / len(good)
    low = min(fractions, key=fractions.get)
    ok = fractions[low] >= 0.99
    criterion(3, ok, f"worst agreement fraction {fractions[low]:.4f} for {low} (need >= 0.99, |diff| <= 1e-4, h = 1e-5)")
    assert ok


def test_4_lipschitz_constants_stable(criterion):
    spec = SPECS["ramp"]
    report = checks.check_thm_lipschitz({n: profile("ramp", n, 400) for n in (4, 8, 16, 32)}, spec)
    kp = {n: c["K_plus"] for n, c in report.constants.items()}
    km = {n: c["K_minus"] for n, c in report.constants.items()}
    ok = report.passed and stable(kp) and stable(km)
    fmt = lambda d: ", ".join(f"{n}:{v:.3f}" for n, v in sorted(d.items()))
    criterion(4, ok, f"K+ {{{fmt(kp)}}}, K- {{{fmt(km)}}} within 2x of n=4")
    assert ok


def test_5_discontinuous_weight(criterion):
    spec = SPECS["step"]
    profiles = {n: profile("step", n, 200) for n in (8, 16, 32, 64)}
    report = checks.check_thm_discont(profiles, spec, eps=0.2, jump_n=32)
    jump = report.constants[32]["jump_pi_prime_minus_w@0"]
    jump_ok = abs(abs(jump) - 4.0) <= 0.2
    cover = {n: report.constants[n]["coverage"] for n in profiles}
    Cs = {n: report.constants[n]["C"] for n in profiles}
    region_ok = report.passed
    ok = region_ok and jump_ok
    criterion(
        5,
        ok,
        f"jump of pi'-w across 0 at n=32: {jump:.5f} (|.| = 4 +- 0.2: {'ok' if jump_ok else 'no'}); "
        f"minimal C per n {{{', '.join(f'{n}:{c:.0f}' for n, c in sorted(Cs.items()))}}}, "
        f"pass-region coverage {{{', '.join(f'{n}:{c:.2f}' for n, c in sorted(cover.items()))}}} "
        f"(need >= 0.90 for some n <= 64: {'reached' if region_ok else 'not reached'})",
    )
    assert ok


def test_6_lambda_bounds_stable(criterion):
    parts = []
    ok = True
    for name, spec in SPECS.items():
        report = checks.check_lambda_bounds({n: profile(name, n, 400) for n in (4, 8, 16)}, spec)
        ok &= report.passed
        up = [report.constants[n]["C_upper"] for n in (4, 8, 16)]
        lo = [report.constants[n]["c_lower"] for n in (4, 8, 16)]
        parts.append(f"{name} C {'/'.join(f'{v:.3f}' for v in up)} c {'/'.join(f'{v:.3f}' for v in lo)}")
    criterion(6, ok, "; ".join(parts) + " (n = 4/8/16, drift <= 2x)")
    assert ok


def test_7_geometry(criterion):
    unit = SPECS["constant"]
    brackets = all(checks.legendre_brackets(n) for n in range(1, 17))
    parts, ok = [], brackets
    for name, spec in SPECS.items():
        report = checks.check_node_geometry(spec, (4, 8, 16))
        inter = all(report.constants[n]["interlacing"] == 1.0 for n in (4, 8, 16))
        ok &= report.passed and inter
        sp = "/".join(f"{report.constants[n]['spacing']:.3f}" for n in (4, 8, 16))
        sep = "/".join(f"{report.constants[n]['separation']:.3f}" for n in (4, 8, 16))
        parts.append(f"{name}: interlacing {'exact' if inter else 'broken'}, spacing {sp}, separation {sep}")
    assert unit.name == "constant"
    criterion(7, ok, f"Legendre brackets n <= 16 {'hold' if brackets else 'fail'}; " + "; ".join(parts))
    assert ok


def test_8_qx_suite(criterion):
    parts, ok = [], True
    for name, spec in SPECS.items():
        report = checks.check_qx_localization(spec, (8, 16), pairs=100)
        ok &= report.passed
        parts.append(
            f"{name}: naive excess {max(report.constants[n]['naive_max_excess'] for n in (8, 16)):.1e}, "
            f"C_decay {report.constants[8]['C_decay']:.3f}/{report.constants[16]['C_decay']:.3f}"
        )
    criterion(8, ok, "; ".join(parts) + " (naive bound exact at 100 pairs, decay drift <= 2x)")
    assert ok


def test_9_oracle_gates(criterion):
    unit = SPECS["constant"]
    table = orthopoly.compute_recurrence(unit, 12)
    beta_err = max(abs(table.beta[k] - float(oracles.legendre_beta(k))) for k in range(1, 13))
    g_nodes, _ = canonical.gaussian_nodes_weights(orthopoly.build_tables(unit, 2))
    gauss_err = float(np.max(np.abs(g_nodes - np.array([-1, 1]) / math.sqrt(3))))
    lob = canonical.lobatto_rep(orthopoly.build_tables(unit, 2))
    lob_err = float(np.max(np.abs(lob.weights - np.array([1 / 3, 4 / 3, 1 / 3]))))
    ok = max(beta_err, gauss_err, lob_err) <= 1e-12
    criterion(9, ok, f"beta error {beta_err:.1e}, Gauss n=2 node error {gauss_err:.1e}, Lobatto n=2 weight error {lob_err:.1e} (tol 1e-12)")
    assert ok


def _qualitative(job, out, text):
    spec = SPECS[job.weight]
    tables = orthopoly.build_tables(spec, job.n)
    marks = svgplot.marker_data(text)
    series = svgplot.series_data(text)
    problems = []
    if not np.allclose(marks["circle"], canonical.gaussian_nodes(tables), rtol=0, atol=1e-15):
        problems.append("circles off the Gaussian nodes")
    if not np.allclose(marks["square"], canonical.eta_all(tables), rtol=0, atol=1e-15):
        problems.append("squares off the Lobatto nodes")
    if job.kind in ("q_x", "p_x"):
        nodes = canonical.rep_of_x(tables, job.x0).nodes
        if not np.allclose(marks.get("triangle", []), nodes, rtol=0, atol=1e-15):
            problems.append("triangles off the nodes of the representation")
    if job.kind == "pi-family":
        x, pi = series["pi"]
        _, F = series["integral of w over [-1, x]"]
        _, pl = series["pi_lower"]
        tol = 1e-9 * weightfn.total_mass(spec)
        if not (np.all(pi >= F - tol) and np.all(F >= pl - tol)):
            problems.append("curves out of order")
        right = x > canonical.gaussian_nodes(tables)[-1]
        if not np.allclose(pi[right], weightfn.total_mass(spec), rtol=1e-12):
            problems.append("no plateau at the total mass")
    if job.kind == "lambda" and np.any(series["lambda"][1] < 0):
        problems.append("negative lambda")
    if job.kind == "q_x":
        t, q = series["q_x"]
        if np.any(q < -1e-10):
            problems.append("q_x negative")
    if job.kind == "pi-prime-minus-w" and job.weight == "step":
        x, d = series["pi' - w"]
        i = int(np.searchsorted(x, 0.0))
        if not abs((d[i] - d[i - 1]) + 4.0) < 0.5:
            problems.append(f"jump at 0 is {d[i] - d[i - 1]:.3f}")
    return problems


def test_10_figure_reproduction(criterion, tmp_path):
    issues = {}
    for job in FIGURE_SET:
        assert cli.main(job.argv(tmp_path), stdout=io.StringIO()) == 0
        text = (tmp_path / f"{job.stem}.svg").read_text()
        found = _qualitative(job, tmp_path, text)
        if svgplot.canonical(text) != (GOLDEN / f"{job.stem}.svg").read_text():
            found.append("differs from golden file")
        if found:
            issues[job.stem] = found
    ok = not issues
    detail = f"{len(FIGURE_SET)} plots regenerated; ordering, plateau, markers and golden comparison " + (
        "all hold" if ok else f"problems: {issues}"
    )
    criterion(10, ok, detail)
    assert ok
