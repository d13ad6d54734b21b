"""Inequality suites: each check measures the implied constant per n and
decides pass/fail by a tolerance or by cross-n stability."""

from __future__ import annotations

import math

import numpy as np

from .. import canonical, extremal, orthopoly, weightfn
from ..errors import MisuseError
from ..orthopoly import sgn
from .report import CheckReport, band_stable, stable

CMS_TOL = 1e-9
NAIVE_SLACK = 1e-12
COVERAGE = 0.9
A_VALUES = (-math.inf, -10.0, -1.0, -0.1, 0.0, 0.1, 1.0, 10.0, math.inf)
SEPARATION_PAIRS = ((0.0, 1.0), (1.0, 10.0), (-1.0, 0.0), (-10.0, -1.0))
SEGMENT_WIDTH = 0.1


def _by_n(profiles):
    if isinstance(profiles, extremal.Profile):
        return {profiles.n: profiles}
    if isinstance(profiles, dict):
        return dict(profiles)
    return {p.n: p for p in profiles}


def _columns(prof):
    """Arrays over the error-free samples of a profile."""
    good = [s for s in prof.samples if s.ok]
    x = np.array([s.x for s in good])
    col = lambda k: np.array([np.nan if getattr(s, k) is None else getattr(s, k) for s in good], dtype=float)
    return x, col("pi"), col("pi_lower"), col("lam"), col("pi_prime"), col("w")


def _record_errors(report, prof):
    bad = [s for s in prof.samples if not s.ok]
    if bad:
        report.fail(f"n={prof.n}: {len(bad)} samples failed, first at x={bad[0].x!r}: {bad[0].error}")


def _mass(prof):
    return weightfn.total_mass(prof.spec)


# ---------------------------------------------------------------- CMS sandwich


def cms_violation(prof):
    """Per-sample max of (pi_lower - F, F - pi, |pi - pi_lower - lambda|)."""
    x, pi, pl, lam, _, _ = _columns(prof)
    F = weightfn.cumulative_mass(prof.spec, x) if x.size else x
    return x, np.maximum.reduce([pl - F, F - pi, np.abs(pi - pl - lam)]) if x.size else x


def check_cms(prof, tol=CMS_TOL):
    report = CheckReport("cms", tolerance=tol)
    _record_errors(report, prof)
    x, viol = cms_violation(prof)
    mass = _mass(prof)
    if x.size:
        j = int(np.argmax(viol))
        report.add(prof.n, "max_violation_over_mass", max(viol[j], 0.0) / mass)
        report.witness = {"x": float(x[j]), "n": prof.n, "value": float(viol[j])}
        if viol[j] > tol * mass:
            report.fail(f"sandwich or identity violated by {viol[j]:.3e} at x={x[j]!r}")
    return report


# ---------------------------------------------------------------- pi' - w theorems


def lipschitz_ratios(x, lam, dpi, w, n):
    """(upper, lower) ratios whose maxima estimate the constants of the
    Lipschitz-case bounds."""
    up = (dpi - w) / (lam * np.minimum(1.0 / (1.0 + x), n * n))
    low = (w - dpi) * (1.0 - x) / lam
    return up, low


def sobolev_ratios(x, lam, dpi, w, n, p, mass=1.0):
    """As ``lipschitz_ratios`` with the extra lambda^(-1/p) term; lambda is
    taken relative to the mass there so the constants are scale-free."""
    extra = (lam / mass) ** (-1.0 / p)
    up = (dpi - w) / (lam * (np.minimum(1.0 / (1.0 + x), n * n) + extra))
    low = (w - dpi) / (lam * (1.0 / (1.0 - x) + extra))
    return up, low


def _theorem_check(name, profiles, ratio_fn):
    report = CheckReport(name, tolerance=2.0)
    plus, minus = {}, {}
    worst = None
    for n, prof in sorted(_by_n(profiles).items()):
        _record_errors(report, prof)
        x, _, _, lam, dpi, w = _columns(prof)
        keep = np.isfinite(dpi)
        up, low = ratio_fn(x[keep], lam[keep], dpi[keep], w[keep], n)
        ju, jl = int(np.argmax(up)), int(np.argmax(low))
        plus[n], minus[n] = float(up[ju]), float(low[jl])
        report.add(n, "K_plus", plus[n])
        report.add(n, "K_minus", minus[n])
        if worst is None or max(plus[n], minus[n]) > worst["value"]:
            side, j, arr = ("upper", ju, up) if plus[n] >= minus[n] else ("lower", jl, low)
            worst = {"x": float(x[keep][j]), "n": n, "side": side, "value": float(arr[j])}
    report.witness = worst
    if not stable(plus):
        report.fail("K_plus drifts more than 2x from the smallest-n baseline")
    if not stable(minus):
        report.fail("K_minus drifts more than 2x from the smallest-n baseline")
    return report


def check_thm_lipschitz(profiles, spec):
    if spec.regularity.kind != "lipschitz":
        raise MisuseError(f"weight {spec.name!r} is not declared Lipschitz")
    return _theorem_check("thm_lipschitz", profiles, lipschitz_ratios)


def check_thm_abs_cont(profiles, spec, p=None):
    kind = spec.regularity.kind
    if kind not in ("sobolev", "lipschitz"):
        raise MisuseError(f"weight {spec.name!r} has no L_p derivative bound")
    if p is None:
        p = spec.regularity.p if spec.regularity.p else 2.0
    mass = weightfn.total_mass(spec)
    report = _theorem_check("thm_abs_cont", profiles, lambda *a: sobolev_ratios(*a, p, mass))
    report.notes.append(f"p={p:g}")
    return report


def discont_required_c(x, dev, n, spec, eps):
    """Smallest C excluding every sample with |pi' - w| > eps.

    A sample is excluded when 1 - x^2 < C/n^2 or |s - x| < C/n. Following
    the one-sided refinement, an upward jump only relaxes the upper bound
    and a downward jump only the lower bound.
    """
    jumps = weightfn.jumps(spec)
    need = np.zeros_like(x)
    for j in np.nonzero(np.abs(dev) > eps)[0]:
        c = n * n * (1.0 - x[j] ** 2)
        for s, left, right in jumps:
            relevant = (dev[j] > 0 and right >= left) or (dev[j] < 0 and right <= left)
            if relevant:
                c = min(c, n * abs(s - x[j]))
        need[j] = np.nextafter(c * (1 + 1e-12), math.inf)  # strictly exclude the violator
    return float(need.max()) if need.size else 0.0


def pass_region(x, n, spec, C):
    keep = 1.0 - x * x >= C / (n * n)
    for s in spec.breakpoints:
        keep &= np.abs(s - x) >= C / n
    return keep


def jump_across(tables, s, delta=1e-7):
    """Jumps of pi' and of pi' - w across s, from samples at s -+ delta."""
    a = extremal.sample_at(tables, s - delta)
    b = extremal.sample_at(tables, s + delta)
    if a.pi_prime is None or b.pi_prime is None:
        return math.nan, math.nan
    return b.pi_prime - a.pi_prime, (b.pi_prime - b.w) - (a.pi_prime - a.w)


def check_thm_discont(profiles, spec, eps=0.2, coverage=COVERAGE, jump_n=None):
    """Searches the supplied n upward for the first one whose pass region
    (outside C/n^2 of the endpoints and C/n of the breakpoints, C minimal)
    covers at least ``coverage`` of the grid."""
    report = CheckReport("thm_discont", tolerance=eps)
    n0 = None
    for n, prof in sorted(_by_n(profiles).items()):
        _record_errors(report, prof)
        x, _, _, _, dpi, w = _columns(prof)
        dev = dpi - w
        keep = np.isfinite(dev)
        C = discont_required_c(x[keep], dev[keep], n, spec, eps)
        region = pass_region(x, n, spec, C) & keep
        frac = float(region.sum()) / max(len(prof.samples), 1)
        report.add(n, "C", C)
        report.add(n, "coverage", frac)
        report.add(n, "within_eps", float(np.mean(np.abs(dev[keep]) <= eps)) if keep.any() else 0.0)
        report.add(n, "max_dev_in_region", float(np.max(np.abs(dev[region]))) if region.any() else 0.0)
        if n0 is None and frac >= coverage:
            n0 = n
            report.witness = {"n": n, "C": C, "coverage": frac}
    for s, left, right in weightfn.jumps(spec):
        n = jump_n or max(_by_n(profiles))
        tables = orthopoly.build_tables(spec, n)
        jp, jd = jump_across(tables, s)
        report.add(n, f"jump_pi_prime@{s:g}", jp)
        report.add(n, f"jump_pi_prime_minus_w@{s:g}", jd)
        report.add(n, f"jump_w@{s:g}", right - left)
    if n0 is None:
        report.fail(f"coverage {coverage:.0%} not reached for n in {sorted(_by_n(profiles))}")
    else:
        report.notes.append(f"n0={n0}")
    return report


# ---------------------------------------------------------------- orthogonal polynomial bounds


def interior_grid(points):
    return np.linspace(-1.0, 1.0, points + 2)[1:-1]


def badkov_quantities(tables, x):
    """Mass-normalised Badkov ratio, Bernstein ratio and psi upper ratio."""
    n = tables.n
    scale = math.sqrt(tables.mass)
    f, df = tables.phi(x)
    g, _ = tables.psi(x)
    rho = np.sqrt(1.0 - x * x)
    mn = np.minimum(n, 1.0 / rho)
    badkov = scale * (np.abs(f) + rho * np.abs(g)) / np.sqrt(mn)
    bern = scale * np.abs(df) / (n * mn**1.5)
    psi_up = scale * np.abs(g) / mn**1.5
    return badkov, bern, psi_up


def check_polynomial_bounds(spec, ns=(4, 8, 16, 32), points=2000):
    report = CheckReport("polynomial_bounds", tolerance=2.0)
    x = interior_grid(points)
    lows, highs, bern, psi_up = {}, {}, {}, {}
    for n in ns:
        tables = orthopoly.build_tables(spec, n)
        b, d, g = badkov_quantities(tables, x)
        lows[n], highs[n], bern[n], psi_up[n] = float(b.min()), float(b.max()), float(d.max()), float(g.max())
        report.add(n, "badkov_low", lows[n])
        report.add(n, "badkov_high", highs[n])
        report.add(n, "bernstein", bern[n])
        report.add(n, "psi_upper", psi_up[n])
    j = max(ns, key=lambda n: highs[n] / highs[ns[0]])
    report.witness = {"n": j, "value": highs[j]}
    if not band_stable(lows, highs):
        report.fail("Badkov band drifts beyond 2x of the smallest-n band")
    if not stable(bern):
        report.fail("Bernstein constant drifts more than 2x")
    if not stable(psi_up):
        report.fail("psi upper-bound constant drifts more than 2x")
    return report


# ---------------------------------------------------------------- node geometry


def legendre_brackets(n):
    i = np.arange(1, n + 1)
    return -np.cos((2 * i - 1) * np.pi / (2 * n + 1)), -np.cos(2 * i * np.pi / (2 * n + 1))


def _is_constant(spec):
    return all(p.kind == "polynomial" and len(p.coeffs) == 1 for p in spec.pieces) and spec.m == spec.M


def node_geometry(tables, spec, a_values=A_VALUES):
    """Measured constants of the node-position bounds at one n."""
    n = tables.n
    kappa = spec.M / spec.m
    eta = canonical.eta_all(tables)
    gauss = canonical.gaussian_nodes(tables)
    i = np.arange(1, n + 1)
    out = {"interlacing": True}

    # endpoint distances of the Gaussian nodes
    up_r = (n + 1 - i) / n
    up_l = i / n
    out["endpoint_upper"] = float(max(
        np.max(np.sqrt(1 - gauss) / (math.sqrt(kappa) * up_r)),
        np.max(np.sqrt(1 + gauss) / (math.sqrt(kappa) * up_l)),
    ))
    out["endpoint_lower"] = float(min(
        np.min(np.sqrt(1 - gauss) / (up_r / math.sqrt(kappa))),
        np.min(np.sqrt(1 + gauss) / (up_l / math.sqrt(kappa))),
    ))

    spacing, gauss_up, gauss_low = 0.0, 0.0, math.inf
    for a in a_values:
        xi = canonical.xi_nodes(tables, a)
        if not math.isinf(a) and not np.all((eta[:-1] < xi) & (xi < eta[1:])):
            out["interlacing"] = False
        if n > 1:
            k = np.arange(1, n)
            spacing = max(spacing, float(np.max(np.diff(xi) / (kappa**2 * k * (n - k) / n**3))))
        gauss_up = max(gauss_up, float(np.max(np.sqrt(1 + xi) / (math.sqrt(kappa) * up_l))),
                       float(np.max(np.sqrt(np.maximum(1 - xi, 0)) / (math.sqrt(kappa) * up_r))))
        right = xi <= gauss[-1]
        if right.any():
            gauss_low = min(gauss_low, float(np.min(np.sqrt(1 - xi[right]) / (up_r[right] / math.sqrt(kappa)))))
        left = xi >= gauss[0]
        if left.any():
            gauss_low = min(gauss_low, float(np.min(np.sqrt(1 + xi[left]) / (up_l[left] / math.sqrt(kappa)))))
    out["spacing"] = spacing
    out["gauss_upper"] = gauss_up
    out["gauss_lower"] = gauss_low

    # separation in a
    sep = math.inf
    for lo, hi in SEPARATION_PAIRS:
        d = canonical.xi_nodes(tables, hi) - canonical.xi_nodes(tables, lo)
        if lo >= 0:
            r = (n + 1 - i) / i
            rhs = (n + 1 - i) ** 2 * (hi - lo) / (n**3 * (1 + r * lo) * (1 + r * hi))
        else:
            r = i / (n + 1 - i)
            rhs = i**2 * (hi - lo) / (n**3 * (1 - r * lo) * (1 - r * hi))
        sep = min(sep, float(np.min(d / rhs)))
    out["separation"] = sep

    # phi and psi cannot both be small
    scale = math.sqrt(tables.mass)
    seg_phi, seg_psi = math.inf, math.inf
    for r in range(1, n):
        half = SEGMENT_WIDTH * r * (n + 1 - r) / n**3
        t = np.clip(eta[r] + np.linspace(-half, half, 21), -1.0, 1.0)
        f, _ = tables.phi(t)
        seg_phi = min(seg_phi, float(np.min(np.abs(f)) * scale / (n / math.sqrt(r * (n + 1 - r)))))
    for r in range(1, n + 1):
        half = SEGMENT_WIDTH * r * (n + 1 - r) / n**3
        t = np.clip(gauss[r - 1] + np.linspace(-half, half, 21), -1.0, 1.0)
        if n > 1:
            g, _ = tables.psi(t)
            seg_psi = min(seg_psi, float(np.min(np.abs(g)) * scale / (n / math.sqrt(r * (n + 1 - r))) ** 3))
    out["segment_phi"] = seg_phi
    out["segment_psi"] = seg_psi

    if _is_constant(spec):
        lo, hi = legendre_brackets(n)
        out["legendre_brackets"] = bool(np.all((lo <= gauss) & (gauss <= hi)))
    return out


STABLE_GEOMETRY = ("endpoint_upper", "endpoint_lower", "spacing", "separation", "gauss_upper", "gauss_lower")


def check_node_geometry(spec, ns=(4, 8, 16)):
    report = CheckReport("node_geometry", tolerance=2.0)
    per_n = {}
    for n in ns:
        g = node_geometry(orthopoly.build_tables(spec, n), spec)
        per_n[n] = g
        for k, v in g.items():
            report.add(n, k, float(v))
        if not g["interlacing"]:
            report.fail(f"interlacing violated at n={n}")
            report.witness = {"n": n, "check": "interlacing"}
        if g.get("legendre_brackets") is False:
            report.fail(f"Legendre bracket violated at n={n}")
            report.witness = {"n": n, "check": "legendre_brackets"}
    keys = list(STABLE_GEOMETRY) + (["segment_phi", "segment_psi"] if min(ns) > 1 else [])
    for key in keys:
        vals = {n: per_n[n][key] for n in ns if math.isfinite(per_n[n][key])}
        if not stable(vals):
            report.fail(f"{key} constant drifts more than 2x")
    return report


def endpoint_weight_constant(tables, spec, xs):
    """max over x of n^2 lambda_x(+-1) / (M^2/m)."""
    n = tables.n
    worst, at = 0.0, None
    for x in xs:
        rep = canonical.rep_of_x(tables, x)
        v = max(rep.weight_at(-1.0), rep.weight_at(1.0)) * n * n / (spec.M**2 / spec.m)
        if v > worst:
            worst, at = v, float(x)
    return worst, at


def check_endpoint_weights(spec, ns=(4, 8, 16), points=101):
    report = CheckReport("endpoint_weights", tolerance=2.0)
    xs = interior_grid(points)
    vals = {}
    for n in ns:
        vals[n], at = endpoint_weight_constant(orthopoly.build_tables(spec, n), spec, xs)
        report.add(n, "C", vals[n])
        if report.witness is None or vals[n] > report.witness["value"]:
            report.witness = {"x": at, "n": n, "value": vals[n]}
    if not stable(vals):
        report.fail("endpoint-weight constant drifts more than 2x")
    return report


# ---------------------------------------------------------------- lambda bounds


def lambda_ratios(x, lam, n, spec):
    env = np.maximum(np.sqrt(1.0 - x * x), 1.0 / n) / n
    return lam / (spec.M * env), lam / (spec.m * env)


def check_lambda_bounds(profiles, spec):
    """Upper constant in units of M, lower constant in units of m."""
    report = CheckReport("lambda_bounds", tolerance=2.0)
    up, low = {}, {}
    for n, prof in sorted(_by_n(profiles).items()):
        _record_errors(report, prof)
        x, _, _, lam, _, _ = _columns(prof)
        u, l = lambda_ratios(x, lam, n, spec)
        up[n], low[n] = float(u.max()), float(l.min())
        report.add(n, "C_upper", up[n])
        report.add(n, "c_lower", low[n])
    if not stable(up):
        report.fail("upper constant drifts more than 2x")
    if not stable(low):
        report.fail("lower constant drifts more than 2x")
    return report


def pa_derivative_ratio(tables, x):
    """|P_a'(x)| over the lower-bound envelope, at x = xi_r(a)."""
    n = tables.n
    param = canonical.param_of_x(tables, x)
    rep = canonical.rep_of_x(tables, x, param)
    lam = rep.weight_at(x)
    if param.is_lobatto:
        _, dg = tables.psi(x)
        return abs(dg) / (math.sqrt(n / lam) / (1 - x * x))
    a = param.a
    gauss = canonical.gaussian_nodes(tables)
    xb = float(orthopoly.truncate_x(x, gauss))
    dP = orthopoly.eval_P(tables, a, x).derivative
    env = max(abs(a) / (1 + sgn(a) * x), 1.0 / math.sqrt(1 - xb * xb))
    return abs(dP) / (math.sqrt(n / lam) * env)


def check_pa_derivative(spec, ns=(4, 8, 16), points=101):
    report = CheckReport("pa_derivative", tolerance=2.0)
    xs = interior_grid(points)
    vals = {}
    for n in ns:
        tables = orthopoly.build_tables(spec, n)
        r = np.array([pa_derivative_ratio(tables, x) for x in xs])
        j = int(np.argmin(r))
        vals[n] = float(r[j])
        report.add(n, "c", vals[n])
    if not stable(vals):
        report.fail("P_a' lower-bound constant drifts more than 2x")
    return report


# ---------------------------------------------------------------- q_x localization


def naive_bound(x, t, spec):
    s = np.sign(x - t)
    return spec.M / spec.m * (1 + s * x) / (1 + s * t)


def localization_ratio(q, x, t, n):
    return q * n * np.maximum(1.0, n * np.sqrt(1.0 - t * t)) * (t - x) ** 2


def check_qx_localization(spec, ns=(8, 16), pairs=100, xs=None, t_points=400, seed=0):
    """Naive bound at random (x, t) pairs; decay constant on an (x, t) grid."""
    report = CheckReport("qx_localization", tolerance=NAIVE_SLACK)
    rng = np.random.default_rng(seed)
    px = rng.uniform(-1, 1, pairs)
    pt = rng.uniform(-1, 1, pairs)
    xs = np.linspace(-0.95, 0.95, 11) if xs is None else np.asarray(xs, dtype=float)
    tg = interior_grid(t_points)
    decay, bounded = {}, {}
    for n in ns:
        tables = orthopoly.build_tables(spec, n)
        worst_naive = 0.0
        for x, t in zip(px, pt):
            rep = canonical.rep_of_x(tables, x)
            q = float(extremal.q_product_form(rep, t)[0])
            excess = q / naive_bound(x, t, spec) - 1.0
            if excess > worst_naive:
                worst_naive = excess
            if excess > NAIVE_SLACK:
                report.fail(f"naive bound violated at n={n}, x={x!r}, t={t!r}")
                report.witness = {"x": float(x), "t": float(t), "n": n, "value": q}
        report.add(n, "naive_max_excess", max(worst_naive, -1.0))
        dmax, bmax = 0.0, 0.0
        for x in xs:
            rep = canonical.rep_of_x(tables, x)
            q = extremal.q_product_form(rep, tg)
            dmax = max(dmax, float(np.max(localization_ratio(q, x, tg, n))))
            bmax = max(bmax, float(np.max(q)))
        decay[n], bounded[n] = dmax, bmax
        report.add(n, "C_decay", dmax)
        report.add(n, "C_bounded", bmax)
    if not stable(decay):
        report.fail("localization constant drifts more than 2x")
    if not stable(bounded):
        report.fail("uniform bound on q_x drifts more than 2x")
    return report


# ---------------------------------------------------------------- circle polynomials (report only)


def _chebyshev_moments(spec, count):
    """c_k = (1/pi) int T_k(t) w(t) dt: Fourier coefficients of w(cos t)|sin t|."""
    t, wq = weightfn.quadrature_rule(spec, count)
    k = np.arange(count + 1)[:, None]
    T = np.cos(k * np.arccos(np.clip(np.asarray(t), -1, 1)))
    return T @ np.asarray(wq) / math.pi


def appendix_consistency(spec, n, thetas=181, tol=1e-6):
    """(2/pi)|phi_2n|^2 = (1 + f/l) phi_n^2 + (1 - f/l) sin^2 psi_{n-1}^2 on a
    theta grid, for the circle polynomials of w(cos t)|sin t|."""
    report = CheckReport("appendix_consistency", tolerance=tol, gating=False)
    if any(p.kind == "tabulated" for p in spec.pieces):
        report.notes.append("skipped: tabulated pieces")
        return report
    m = 2 * n
    c = _chebyshev_moments(spec, m)
    G = np.array([[c[abs(j - k)] for k in range(m + 1)] for j in range(m + 1)])
    a = np.linalg.solve(G[:m, :m], -G[:m, m])
    norm2 = G[m, m] + G[m, :m] @ a
    coef = np.concatenate([a, [1.0]]) / math.sqrt(norm2)  # ascending powers of z
    lead, const = coef[-1], coef[0]
    theta = np.linspace(-np.pi, np.pi, thetas)
    z = np.exp(1j * theta)
    circ = np.abs(np.polyval(coef[::-1], z)) ** 2 * 2 / math.pi
    tables = orthopoly.build_tables(spec, n)
    x = np.cos(theta)
    f, _ = tables.phi(x)
    g, _ = tables.psi(x)
    rhs = (1 + const / lead) * f**2 + (1 - const / lead) * np.sin(theta) ** 2 * g**2
    rel = float(np.max(np.abs(circ - rhs)) / np.max(np.abs(rhs)))
    report.add(n, "max_relative_mismatch", rel)
    if rel > tol:
        report.fail(f"circle relation mismatch {rel:.3e}")
    return report
