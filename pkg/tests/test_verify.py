import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmsquad import canonical, extremal, orthopoly, verify, weightfn
from cmsquad.errors import MisuseError
from cmsquad.verify import checks
from cmsquad.verify.report import CheckReport, band_stable, stable


@pytest.fixture(scope="module")
def ramp_profiles():
    spec = weightfn.ramp_weight()
    return spec, {n: extremal.profile(spec, n, 120) for n in (4, 8, 16)}


@pytest.fixture(scope="module")
def scaled_profiles():
    spec = weightfn.scaled_spec(weightfn.ramp_weight(), 7.0)
    return spec, {n: extremal.profile(spec, n, 120) for n in (4, 8, 16)}


def test_stability_rules():
    assert stable({4: 1.0, 8: 1.9, 16: 0.6})
    assert not stable({4: 1.0, 8: 2.1})
    assert not stable({4: 1.0, 8: 0.4})
    assert stable({4: 0.0, 8: -1.0}) and not stable({4: 0.0, 8: 1.0})
    assert band_stable({4: 1.0, 8: 0.6}, {4: 2.0, 8: 3.9})
    assert not band_stable({4: 1.0, 8: 0.4}, {4: 2.0, 8: 2.0})


def test_cms_passes_and_detects_fault():
    prof = extremal.profile(weightfn.constant_weight(), 4, 80)
    assert checks.check_cms(prof).passed
    bad = verify.inject_fault(prof, 1e-6)
    report = checks.check_cms(bad)
    assert not report.passed
    assert report.witness["n"] == 4 and -1 < report.witness["x"] < 1


def test_cms_fails_at_ten_times_tolerance():
    prof = extremal.profile(weightfn.step_weight(), 5, 50)
    assert not checks.check_cms(verify.inject_fault(prof, 10 * checks.CMS_TOL * prof.mass)).passed


def test_cms_trivial_n1():
    assert checks.check_cms(extremal.profile(weightfn.constant_weight(), 1, 30)).passed


def test_lipschitz_constants_stable(ramp_profiles):
    spec, profiles = ramp_profiles
    report = checks.check_thm_lipschitz(profiles, spec)
    assert report.passed, report.text()
    assert set(report.constants[4]) == {"K_plus", "K_minus"}


def test_lipschitz_witness_reproduces(ramp_profiles):
    spec, profiles = ramp_profiles
    report = checks.check_thm_lipschitz(profiles, spec)
    wit = report.witness
    n, x = wit["n"], wit["x"]
    tables = orthopoly.build_tables(spec, n)
    s = extremal.sample_at(tables, x)
    up, low = checks.lipschitz_ratios(np.array([x]), np.array([s.lam]), np.array([s.pi_prime]), np.array([s.w]), n)
    value = up[0] if wit["side"] == "upper" else low[0]
    assert value == pytest.approx(wit["value"], rel=1e-9)


def test_lipschitz_precondition(step):
    with pytest.raises(MisuseError):
        checks.check_thm_lipschitz({4: extremal.profile(step, 4, 20)}, step)


def test_abs_cont_accepts_lipschitz_weight(ramp_profiles):
    spec, profiles = ramp_profiles
    assert checks.check_thm_abs_cont(profiles, spec).passed


def test_lambda_bounds_stable(ramp_profiles):
    spec, profiles = ramp_profiles
    assert checks.check_lambda_bounds(profiles, spec).passed


def test_lambda_check_detects_drift(ramp_profiles):
    spec, profiles = ramp_profiles
    skewed = dict(profiles)
    skewed[16] = extremal.Profile(
        profiles[16].digest, 16,
        [s.__class__(**{**s.__dict__, "lam": s.lam * 20}) for s in profiles[16].samples],
        profiles[16].excluded_points, profiles[16].radius, spec,
    )
    assert not checks.check_lambda_bounds(skewed, spec).passed


def test_constants_are_scale_free(ramp_profiles, scaled_profiles):
    spec, profiles = ramp_profiles
    spec7, profiles7 = scaled_profiles
    pairs = [
        (checks.check_thm_lipschitz(profiles, spec), checks.check_thm_lipschitz(profiles7, spec7)),
        (checks.check_thm_abs_cont(profiles, spec), checks.check_thm_abs_cont(profiles7, spec7)),
        (checks.check_lambda_bounds(profiles, spec), checks.check_lambda_bounds(profiles7, spec7)),
        (checks.check_node_geometry(spec, (4, 8)), checks.check_node_geometry(spec7, (4, 8))),
        (checks.check_polynomial_bounds(spec, (4, 8), 200), checks.check_polynomial_bounds(spec7, (4, 8), 200)),
        (checks.check_pa_derivative(spec, (4, 8), 21), checks.check_pa_derivative(spec7, (4, 8), 21)),
        (checks.check_endpoint_weights(spec, (4, 8), 21), checks.check_endpoint_weights(spec7, (4, 8), 21)),
    ]
    for a, b in pairs:
        for n in a.constants:
            for key, v in a.constants[n].items():
                assert b.constants[n][key] == pytest.approx(v, rel=1e-9, abs=1e-12), (a.name, n, key)


def test_discont_reports_jump(step):
    profiles = {n: extremal.profile(step, n, 100) for n in (8, 16)}
    report = checks.check_thm_discont(profiles, step, eps=0.2, jump_n=16)
    c = report.constants[16]
    assert c["jump_w@0"] == 4.0
    assert abs(c["jump_pi_prime_minus_w@0"] + 4.0) < 0.2
    assert abs(c["jump_pi_prime@0"]) < 0.2
    assert 0.0 <= c["coverage"] <= 1.0 and c["C"] > 0


def test_discont_pass_region_excludes_violators():
    x = np.linspace(-0.99, 0.99, 199)
    spec = weightfn.step_weight()
    dev = np.where(np.abs(x) < 0.1, 1.0, 0.0)
    C = checks.discont_required_c(x, dev, 8, spec, 0.2)
    region = checks.pass_region(x, 8, spec, C)
    assert not np.any(region & (np.abs(dev) > 0.2))
    assert region.mean() > 0.5


def test_polynomial_bounds(spec):
    assert checks.check_polynomial_bounds(spec, (4, 8, 16), 500).passed


def test_node_geometry_constant_weight(unit):
    report = checks.check_node_geometry(unit, (4, 8, 16))
    assert report.passed, report.text()
    for n in (4, 8, 16):
        assert report.constants[n]["interlacing"] == 1.0
        assert report.constants[n]["legendre_brackets"] == 1.0
        assert report.constants[n]["separation"] > 0


def test_qx_naive_bound(ramp):
    report = checks.check_qx_localization(ramp, (8, 16), pairs=100)
    assert report.passed
    assert all(report.constants[n]["naive_max_excess"] <= checks.NAIVE_SLACK for n in (8, 16))


@given(x=st.floats(-0.99, 0.99))
def test_naive_bound_equals_one_at_t_equal_x(x):
    spec = weightfn.step_weight()
    assert checks.naive_bound(x, x, spec) == pytest.approx(spec.M / spec.m)


def test_appendix_consistency_report_only(unit):
    report = checks.appendix_consistency(unit, 2)
    assert report.passed and not report.gating


def test_appendix_skips_tabulated():
    report = checks.appendix_consistency(weightfn.sqrt_ramp_weight(), 4)
    assert not report.gating and report.notes


def test_run_suite_rejects_unknown_names(unit):
    with pytest.raises(MisuseError):
        verify.run_suite(unit, ["cms", "nonsense"])


def test_run_suite_skips_inapplicable(step):
    reports = verify.run_suite(step, ["lipschitz", "cms"], (4,), grid=30)
    assert [r.name for r in reports] == ["cms[n=4]"]


def test_report_formats():
    r = CheckReport("demo", tolerance=0.5)
    r.add(4, "C", 1.25)
    r.witness = {"x": 0.1, "n": 4}
    text = verify.text_report([r])
    assert text.startswith("[demo] PASS") and "n=4: C=1.25" in text
    csv = verify.csv_report([r]).splitlines()
    assert csv[0] == "check,n,constant,value,passed,gating"
    assert csv[1] == "demo,4,C,1.25,1,1"
    r.fail("broken")
    assert not verify.all_passed([r])
