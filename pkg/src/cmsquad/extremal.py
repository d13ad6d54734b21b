"""Interpolation polynomials q_x, p_x, p_x (lower) and the extremal functions.

For a node set S_x with multiplicities (2 at interior nodes other than x,
1 at x and at +-1) every polynomial here is a 0/1 combination of the
Hermite-Lagrange basis polynomials

    l_u(t) = prod_{v != u} ((t - v) / (u - v))^{m_v},
    h_u(t) = l_u(t)                             if m_u = 1,
    h_u(t) = l_u(t) (1 - (t - u) l_u'(u))       if m_u = 2,

which are evaluated in product form (no monomial or Newton coefficients).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import canonical, orthopoly, weightfn
from .canonical import CanonicalParam
from .errors import CMSError, ConstructionError

SCAN_POINTS = 1000
NONNEG_TOL = 1e-10
IDENTITY_TOL = 1e-10
PI_TOL = 1e-9
PRIME_TOL = 1e-8


def chebyshev_scan(k=SCAN_POINTS):
    """k Chebyshev points of the first kind, ascending, plus the endpoints."""
    j = np.arange(k)
    return np.concatenate([[-1.0], -np.cos((2 * j + 1) * np.pi / (2 * k)), [1.0]])


# ---------------------------------------------------------------- interpolant


def _basis(nodes, mult, t):
    """(H, dH): values and derivatives of every h_u at the points t."""
    N = nodes.size
    t = np.atleast_1d(np.asarray(t, dtype=float))
    H = np.empty((N, t.size))
    dH = np.empty((N, t.size))
    num = t[None, :] - nodes[:, None]
    ones = np.ones((1, t.size))
    for u in range(N):
        others = np.arange(N) != u
        den = nodes[u] - nodes[others]
        ratio = num[others] / den[:, None]
        m = mult[others][:, None]
        factors = np.where(m == 2, ratio * ratio, ratio)
        slopes = np.where(m == 2, 2.0 * ratio, 1.0) / den[:, None]
        # product rule with prefix/suffix products: no division by t - v
        prefix = np.cumprod(np.vstack([ones, factors[:-1]]), axis=0)
        suffix = np.cumprod(np.vstack([ones, factors[::-1][:-1]]), axis=0)[::-1]
        ell = prefix[-1] * factors[-1] if factors.shape[0] else ones[0]
        dell = (slopes * prefix * suffix).sum(axis=0)
        if mult[u] == 2:
            c = float(np.sum(mult[others] / den))
            lin = 1.0 - c * (t - nodes[u])
            H[u] = ell * lin
            dH[u] = dell * lin - c * ell
        else:
            H[u] = ell
            dH[u] = dell
    return H, dH


@dataclass(frozen=True, eq=False)
class HermiteInterpolant:
    """Polynomial with prescribed values at ``nodes`` and zero slope where
    ``mult`` is 2. Degree is sum(mult) - 1."""

    nodes: np.ndarray
    mult: np.ndarray
    values: np.ndarray
    name: str = "p"

    @property
    def degree(self):
        return int(self.mult.sum()) - 1

    def basis(self, t):
        return _basis(self.nodes, self.mult, t)

    def evaluate(self, t):
        """(value, derivative) at t."""
        scalar = np.ndim(t) == 0
        H, dH = self.basis(t)
        v, d = self.values @ H, self.values @ dH
        if scalar:
            return float(v[0]), float(d[0])
        return v, d

    def __call__(self, t):
        return self.evaluate(t)[0]

    def derivative(self, t):
        return self.evaluate(t)[1]

    def residual(self):
        """Max error in the prescribed values and slopes at the nodes."""
        v, d = self.evaluate(self.nodes)
        err = np.abs(v - self.values)
        flat = self.mult == 2
        if flat.any():
            err = np.concatenate([err, np.abs(d[flat])])
        return float(err.max())

    def integral(self, spec):
        """int h(t) w(t) dt and int h'(t) w(t) dt (both exact)."""
        t, wq = weightfn.quadrature_rule(spec, max(self.degree, 0))
        H, dH = self.basis(np.asarray(t))
        wq = np.asarray(wq)
        return math.fsum(self.values @ H * wq), math.fsum(self.values @ dH * wq)


def _multiplicities(rep):
    mult = rep.indices.astype(int).copy()
    mult[rep.position_of_x()] = 1
    return mult


def _interpolant(rep, values, name):
    return HermiteInterpolant(rep.nodes, _multiplicities(rep), np.asarray(values, dtype=float), name)


def _selector(rep, inclusive):
    return (rep.nodes <= rep.x) if inclusive else (rep.nodes < rep.x)


def _scan_check(poly, lower, upper, what):
    t = chebyshev_scan()
    v = poly(t)
    if lower is not None and np.min(v - lower(t)) < -NONNEG_TOL:
        j = int(np.argmin(v - lower(t)))
        raise ConstructionError(f"{what} violated at t={t[j]!r} (value {v[j]!r})")
    if upper is not None and np.max(v - upper(t)) > NONNEG_TOL:
        j = int(np.argmax(v - upper(t)))
        raise ConstructionError(f"{what} violated at t={t[j]!r} (value {v[j]!r})")


def q_lagrange_form(rep, tables, t):
    """q_x through the roots of P_a (or psi in the Lobatto case); t != x."""
    x = rep.x
    t = np.asarray(t, dtype=float)
    a = rep.param.a
    if math.isinf(a):
        g, _ = tables.psi(t)
        _, dg = tables.psi(x)
        return (1 - t * t) / (1 - x * x) * (g / ((t - x) * dg)) ** 2
    s = orthopoly.sgn(a)
    P = orthopoly.eval_P(tables, a, t).value
    dP = orthopoly.eval_P(tables, a, x).derivative
    return (1 + s * t) / (1 + s * x) * (P / ((t - x) * dP)) ** 2


def q_product_form(rep, t):
    """Direct product over S_x - {x} of ((t-u)/(x-u))^I(u)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    others = rep.nodes != rep.x
    u = rep.nodes[others]
    e = rep.indices[others]
    return np.prod(((t[None, :] - u[:, None]) / (rep.x - u)[:, None]) ** e[:, None], axis=0)


def build_qx(rep, tables=None, check=True):
    """q_x: 1 at x, 0 at the other nodes of S_x, flat at interior nodes != x."""
    values = (rep.nodes == rep.x).astype(float)
    q = _interpolant(rep, values, "q_x")
    if check:
        _scan_check(q, lambda t: 0.0 * t, None, "nonnegativity of q_x")
        t = chebyshev_scan(200)
        ref = q_product_form(rep, t)
        v = q(t)
        scale = max(1.0, float(np.max(np.abs(ref))))
        if np.max(np.abs(v - ref)) > 1e-9 * scale:
            raise ConstructionError("q_x disagrees with its product form")
        if tables is not None:
            far = np.abs(t - rep.x) > 1e-3
            alt = q_lagrange_form(rep, tables, t[far])
            if np.max(np.abs(alt - ref[far])) > 1e-9 * scale:
                raise ConstructionError("q_x disagrees with its P_a form")
    return q


def build_px(rep, check=True):
    """p_x: 1 on S_x within [-1, x], 0 on S_x within (x, 1]."""
    p = _interpolant(rep, _selector(rep, True).astype(float), "p_x")
    if check:
        _check_pair(rep, p, _interpolant(rep, _selector(rep, False).astype(float), "p_x_lower"))
    return p


def build_px_lower(rep, check=True):
    """p_x (lower): 1 on S_x within [-1, x), 0 on S_x within [x, 1]."""
    pl = _interpolant(rep, _selector(rep, False).astype(float), "p_x_lower")
    if check:
        _check_pair(rep, _interpolant(rep, _selector(rep, True).astype(float), "p_x"), pl)
    return pl


def _check_pair(rep, p, pl):
    t = chebyshev_scan()
    q = q_product_form(rep, t)
    if np.max(np.abs(p(t) - pl(t) - q)) > IDENTITY_TOL * max(1.0, float(q.max())):
        raise ConstructionError("p_x - p_x_lower != q_x")
    chi_closed = lambda s: (s <= rep.x).astype(float)
    chi_open = lambda s: (s < rep.x).astype(float)
    _scan_check(p, chi_closed, None, "p_x >= characteristic function of [-1, x]")
    _scan_check(pl, None, chi_open, "p_x_lower <= characteristic function of [-1, x)")


# ---------------------------------------------------------------- extremal values


def _p_integrals(rep, spec):
    """int p_x w, int p_x_lower w and int p_x' w from one basis evaluation."""
    p = _interpolant(rep, np.zeros(rep.nodes.size), "basis")
    t, wq = weightfn.quadrature_rule(spec, max(p.degree, 0))
    H, dH = p.basis(np.asarray(t))
    wq = np.asarray(wq)
    upper, lower = _selector(rep, True), _selector(rep, False)
    return (
        math.fsum(H[upper].sum(axis=0) * wq),
        math.fsum(H[lower].sum(axis=0) * wq),
        math.fsum(dH[upper].sum(axis=0) * wq),
    )


def pi_at(rep, tables=None, check=True, integrals=None):
    """(pi, pi_lower, lambda) as partial sums of the weights of Sigma_x."""
    lam = rep.weight_at(rep.x)
    pi = math.fsum(rep.weights[_selector(rep, True)])
    pi_lower = math.fsum(rep.weights[_selector(rep, False)])
    if check and tables is not None:
        ip, il, _ = integrals or _p_integrals(rep, tables.spec)
        scale = tables.mass
        if abs(ip - pi) > PI_TOL * scale or abs(il - pi_lower) > PI_TOL * scale:
            raise ConstructionError(
                f"partial sums disagree with integrals of p_x at x={rep.x!r}: "
                f"{pi!r} vs {ip!r}, {pi_lower!r} vs {il!r}"
            )
    return pi, pi_lower, lam


def principal_nodes(tables):
    """Sorted union of Gaussian nodes and interior Lobatto nodes."""
    return np.sort(np.concatenate([canonical.gaussian_nodes(tables), canonical.lobatto_interior(tables)]))


def is_excluded(tables, x, radius):
    nodes = principal_nodes(tables)
    return bool(nodes.size) and float(np.min(np.abs(nodes - x))) <= radius


@dataclass(frozen=True)
class PiPrime:
    value: float
    endpoint_form: float

    @property
    def discrepancy(self):
        return abs(self.value - self.endpoint_form)


def pi_prime_forms(rep, tables, integrals=None):
    """-lambda p_x'(x) and the endpoint form of the same quantity."""
    p = build_px(rep, check=False)
    lam = rep.weight_at(rep.x)
    _, d = p.evaluate(np.array([-1.0, rep.x, 1.0]))
    d_end, dx = d[[0, 2]], d[1]
    if integrals is None:
        integrals = _p_integrals(rep, tables.spec)
    int_dp = integrals[2]
    endpoint = rep.weight_at(-1.0) * d_end[0] + rep.weight_at(1.0) * d_end[1] - int_dp
    return PiPrime(-lam * dx, endpoint)


def pi_prime_at(rep, tables, radius=0.0, check=True, integrals=None):
    """pi'(x) = -lambda(x) p_x'(x), or None inside the exclusion radius of a
    Gaussian or Lobatto node (where pi is not differentiable)."""
    if is_excluded(tables, rep.x, radius):
        return None
    forms = pi_prime_forms(rep, tables, integrals)
    if check:
        scale = max(1.0, abs(forms.value), abs(forms.endpoint_form))
        if forms.discrepancy > PRIME_TOL * scale:
            raise ConstructionError(
                f"derivative forms disagree at x={rep.x!r}: {forms.value!r} vs {forms.endpoint_form!r}"
            )
    return forms.value


# ---------------------------------------------------------------- profiles


@dataclass(frozen=True)
class ExtremalSample:
    x: float
    pi: float
    pi_lower: float
    lam: float
    pi_prime: float | None
    w: float
    param: CanonicalParam | None
    error: str | None = None

    @property
    def excluded(self):
        return self.pi_prime is None

    @property
    def ok(self):
        return self.error is None


@dataclass(frozen=True, eq=False)
class Profile:
    digest: str
    n: int
    samples: list
    excluded_points: np.ndarray
    radius: float
    spec: object = field(default=None, repr=False)

    def column(self, name):
        return np.array([np.nan if getattr(s, name) is None else getattr(s, name) for s in self.samples], dtype=float)

    @property
    def x(self):
        return self.column("x")

    @property
    def mass(self):
        return weightfn.total_mass(self.spec)

    def monotone(self, slack=1e-10):
        pi, pl = self.column("pi"), self.column("pi_lower")
        ok = np.isfinite(pi)
        return bool(np.all(np.diff(pi[ok]) >= -slack) and np.all(np.diff(pl[ok]) >= -slack))


def grid_points(grid):
    """Interior points of an equispaced grid of ``grid`` points on [-1, 1].

    A grid of fewer than three points has no interior; it is refined to
    ``grid`` interior points instead.
    """
    if grid < 2:
        raise ValueError("grid size must be >= 2")
    if grid < 3:
        return np.linspace(-1.0, 1.0, grid + 2)[1:-1]
    return np.linspace(-1.0, 1.0, grid)[1:-1]


def sample_at(tables, x, radius=0.0, check=True):
    """Extremal sample at x; numerical failures are recorded, not raised."""
    w = weightfn.eval_weight(tables.spec, x)
    try:
        rep = canonical.rep_of_x(tables, x)
        integrals = _p_integrals(rep, tables.spec)
        pi, pl, lam = pi_at(rep, tables, check=check, integrals=integrals)
        dpi = pi_prime_at(rep, tables, radius, check=check, integrals=integrals)
        return ExtremalSample(float(x), pi, pl, lam, dpi, w, rep.param)
    except (CMSError, FloatingPointError) as exc:
        nan = float("nan")
        return ExtremalSample(float(x), nan, nan, nan, None, w, None, f"{type(exc).__name__}: {exc}")


def profile(spec, n, grid, check=True, tables=None, points=None):
    """Extremal samples on the interior of an equispaced grid."""
    if tables is None:
        tables = orthopoly.build_tables(spec, n)
    xs = grid_points(grid) if points is None else np.sort(np.asarray(points, dtype=float))
    radius = 0.5 * (xs[1] - xs[0]) if xs.size > 1 else 0.0
    canonical.gaussian_nodes(tables)
    canonical.lobatto_interior(tables)
    samples = [sample_at(tables, x, radius, check) for x in xs]
    return Profile(weightfn.digest(spec), n, samples, principal_nodes(tables), radius, spec)


def _fmt(v):
    return "" if v is None else f"{v + 0.0:.17g}"


def format_profile_csv(prof):
    lines = ["x,pi,pi_lower,lambda,pi_prime,w,excluded"]
    for s in prof.samples:
        lines.append(
            f"{_fmt(s.x)},{_fmt(s.pi)},{_fmt(s.pi_lower)},{_fmt(s.lam)},"
            f"{_fmt(s.pi_prime)},{_fmt(s.w)},{int(s.excluded)}"
        )
    return "\n".join(lines) + "\n"


def write_profile_csv(prof, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_profile_csv(prof))


def read_profile_csv(path):
    """Rows of a profile CSV as a dict of float arrays (NaN for empty cells)."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    cols = {}
    for j, name in enumerate(header):
        cols[name] = np.array([float(r[j]) if r[j] else np.nan for r in rows])
    return cols


def finite_difference_pi(tables, x, h=1e-5):
    """(pi(x + h) - pi(x - h)) / 2h."""
    hi = pi_at(canonical.rep_of_x(tables, x + h), check=False)[0]
    lo = pi_at(canonical.rep_of_x(tables, x - h), check=False)[0]
    return (hi - lo) / (2 * h)


__all__ = [
    "HermiteInterpolant",
    "ExtremalSample",
    "Profile",
    "build_qx",
    "build_px",
    "build_px_lower",
    "pi_at",
    "pi_prime_at",
    "profile",
    "write_profile_csv",
]
