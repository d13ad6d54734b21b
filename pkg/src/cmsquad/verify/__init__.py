"""Verification suites for the extremal functions and their bounds."""

from __future__ import annotations

import dataclasses

from .. import extremal, orthopoly
from ..errors import MisuseError
from . import checks, oracles
from .report import CheckReport, all_passed, csv_report, text_report

DEFAULT_NS = (4, 8, 16)
SUITES = (
    "cms",
    "lipschitz",
    "abs-cont",
    "discont",
    "polynomial",
    "geometry",
    "endpoint",
    "lambda",
    "pa-derivative",
    "qx",
    "appendix",
)
DEFAULT_SUITE = ("cms", "lipschitz", "abs-cont", "discont", "polynomial", "geometry", "lambda", "qx")


def applicable(spec, name):
    kind = spec.regularity.kind
    if name == "lipschitz":
        return kind == "lipschitz"
    if name == "abs-cont":
        return kind in ("lipschitz", "sobolev")
    if name == "discont":
        return kind == "piecewise-abs-cont"
    return True


def inject_fault(prof, delta):
    """Copy of ``prof`` with every lambda shifted by ``delta`` (fault injection)."""
    samples = [dataclasses.replace(s, lam=s.lam + delta) for s in prof.samples]
    return dataclasses.replace(prof, samples=samples)


def run_suite(spec, names=DEFAULT_SUITE, ns=DEFAULT_NS, grid=200, eps=0.2, explicit=False, fault=0.0):
    """Run the named checks; inapplicable regularity checks are skipped unless
    ``explicit`` (then they raise a precondition error).

    A nonzero ``fault`` shifts lambda by ``fault * mass`` in every profile
    before the checks run; used to confirm that the harness can fail.
    """
    unknown = [s for s in names if s not in SUITES]
    if unknown:
        raise MisuseError(f"unknown suite(s): {', '.join(unknown)}")
    ns = tuple(sorted(ns))
    needs_profiles = {"cms", "lipschitz", "abs-cont", "discont", "lambda"} & set(names)
    profiles = {}
    if needs_profiles:
        for n in ns:
            profiles[n] = extremal.profile(spec, n, grid, tables=orthopoly.build_tables(spec, n))
            if fault:
                profiles[n] = inject_fault(profiles[n], fault * profiles[n].mass)
    reports = []
    for name in names:
        if not explicit and not applicable(spec, name):
            continue
        if name == "cms":
            for n in ns:
                r = checks.check_cms(profiles[n])
                r.name = f"cms[n={n}]"
                reports.append(r)
        elif name == "lipschitz":
            reports.append(checks.check_thm_lipschitz(profiles, spec))
        elif name == "abs-cont":
            reports.append(checks.check_thm_abs_cont(profiles, spec))
        elif name == "discont":
            reports.append(checks.check_thm_discont(profiles, spec, eps))
        elif name == "polynomial":
            reports.append(checks.check_polynomial_bounds(spec, ns))
        elif name == "geometry":
            reports.append(checks.check_node_geometry(spec, ns))
        elif name == "endpoint":
            reports.append(checks.check_endpoint_weights(spec, ns))
        elif name == "lambda":
            reports.append(checks.check_lambda_bounds(profiles, spec))
        elif name == "pa-derivative":
            reports.append(checks.check_pa_derivative(spec, ns))
        elif name == "qx":
            reports.append(checks.check_qx_localization(spec, tuple(n for n in ns if n >= 2) or ns))
        elif name == "appendix":
            reports.append(checks.appendix_consistency(spec, ns[0]))
    return reports


__all__ = [
    "CheckReport",
    "SUITES",
    "DEFAULT_SUITE",
    "run_suite",
    "inject_fault",
    "all_passed",
    "text_report",
    "csv_report",
    "checks",
    "oracles",
]
