"""Recurrence coefficients and evaluation of the orthonormal polynomials.

``phi`` is the degree-n orthonormal polynomial for w and ``psi`` the
degree-(n-1) orthonormal polynomial for (1 - t^2) w, both with positive
leading coefficient. Indexing: the ``psi`` of the canonical-representation
machinery is ``eval_psi(circle_table, n - 1, x)``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import weightfn
from .errors import DomainError, IllConditionedError, MisuseError

DEFAULT_DEGREE_CAP = 64
DEGREE_CAP_ENV = "CMSQUAD_DEGREE_CAP"
ORTHO_TOL = 1e-10


def degree_cap():
    value = os.environ.get(DEGREE_CAP_ENV)
    return int(value) if value else DEFAULT_DEGREE_CAP


@dataclass(frozen=True, eq=False)
class RecurrenceTable:
    """Monic recurrence p_{k+1} = (t - alpha[k]) p_k - beta[k] p_{k-1}.

    ``beta[0]`` holds the total mass of the (possibly modified) weight and
    ``norms[k]`` the L2 norm of the monic p_k.
    """

    which: str
    alpha: np.ndarray
    beta: np.ndarray
    norms: np.ndarray

    @property
    def K(self):
        return len(self.alpha) - 1


@dataclass(frozen=True)
class PolyEval:
    value: float | np.ndarray
    derivative: float | np.ndarray


def _discrete_measure(spec, K, which):
    extra = 2 if which == "circle" else 0
    x, w = weightfn.quadrature_rule(spec, 2 * K + 1 + extra)
    if which == "circle":
        w = w * (1.0 - x) * (1.0 + x)
    return np.asarray(x), np.asarray(w)


def compute_recurrence(spec, K, which="plain", cap=None, check=True):
    """Stieltjes procedure on an exact discretization of w (or (1-t^2) w)."""
    if which not in ("plain", "circle"):
        raise ValueError(f"unknown weight selector {which!r}")
    cap = degree_cap() if cap is None else cap
    if K < 0 or K > cap:
        raise ValueError(f"degree {K} outside [0, {cap}]")
    x, w = _discrete_measure(spec, K, which)

    alpha = np.zeros(K + 1)
    beta = np.zeros(K + 1)
    values = np.zeros((K + 1, x.size))
    beta[0] = math.fsum(w)
    prev = np.zeros_like(x)
    cur = np.full_like(x, 1.0 / math.sqrt(beta[0]))
    for k in range(K + 1):
        values[k] = cur
        alpha[k] = math.fsum(w * x * cur * cur)
        if k == K:
            break
        nxt = (x - alpha[k]) * cur - (math.sqrt(beta[k]) if k else 0.0) * prev
        b = math.fsum(w * nxt * nxt)
        if not b > 0.0:
            raise IllConditionedError("non-positive recurrence coefficient beta", k + 1)
        beta[k + 1] = b
        prev, cur = cur, nxt / math.sqrt(b)

    if check:
        gram = (values * w) @ values.T
        resid = np.abs(gram - np.eye(K + 1))
        bad = np.argwhere(resid > ORTHO_TOL)
        if bad.size:
            raise IllConditionedError("orthogonality residual exceeded", int(bad.max(axis=1).min()))
    if np.any(np.abs(alpha) >= 1.0):
        raise IllConditionedError("recurrence coefficient alpha outside (-1, 1)", int(np.argmax(np.abs(alpha))))
    norms = np.sqrt(np.cumprod(beta))
    for arr in (alpha, beta, norms):
        arr.setflags(write=False)
    return RecurrenceTable(which, alpha, beta, norms)


def orthonormal(table, k, x):
    """Value and derivative of the degree-k orthonormal polynomial at x."""
    if k < 0 or k > table.K:
        raise ValueError(f"degree {k} exceeds table degree {table.K}")
    x = np.asarray(x, dtype=float)
    a, b = table.alpha, table.beta
    p_prev = np.zeros_like(x)
    p = np.full_like(x, 1.0 / math.sqrt(b[0]))
    d_prev = np.zeros_like(x)
    d = np.zeros_like(x)
    for j in range(k):
        s_next = math.sqrt(b[j + 1])
        s_cur = math.sqrt(b[j]) if j else 0.0
        p_next = ((x - a[j]) * p - s_cur * p_prev) / s_next
        d_next = (p + (x - a[j]) * d - s_cur * d_prev) / s_next
        p_prev, p = p, p_next
        d_prev, d = d, d_next
    if p.ndim == 0:
        return float(p), float(d)
    return p, d


def orthonormal_basis(table, k_max, x):
    """Matrix of values of the orthonormal polynomials of degree 0..k_max at x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros((k_max + 1, x.size))
    a, b = table.alpha, table.beta
    out[0] = 1.0 / math.sqrt(b[0])
    for j in range(k_max):
        prev = out[j - 1] if j else 0.0
        out[j + 1] = ((x - a[j]) * out[j] - (math.sqrt(b[j]) if j else 0.0) * prev) / math.sqrt(b[j + 1])
    return out


def _check_x(x):
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(np.abs(arr) > 1.0):
        raise DomainError("x outside [-1, 1]")


def eval_phi(table, n, x):
    _check_x(x)
    return PolyEval(*orthonormal(table, n, x))


def eval_psi(table, k, x):
    """Degree-k orthonormal polynomial for (1 - t^2) w; pass k = n - 1."""
    if table.which != "circle":
        raise MisuseError("eval_psi needs the (1 - t^2) w recurrence table")
    _check_x(x)
    return PolyEval(*orthonormal(table, k, x))


@dataclass(frozen=True, eq=False)
class Tables:
    """Recurrence tables for one weight at one degree n."""

    spec: object
    n: int
    plain: RecurrenceTable
    circle: RecurrenceTable
    cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    @property
    def mass(self):
        return float(self.plain.beta[0])

    def phi(self, x):
        return orthonormal(self.plain, self.n, x)

    def psi(self, x):
        return orthonormal(self.circle, self.n - 1, x)


def build_tables(spec, n, plain_degree=None, cap=None):
    """Tables for phi (degree n) and psi (degree n-1).

    The plain table extends to ``plain_degree`` (default min(2n - 1, cap))
    so that exactness checks can use the orthonormal basis directly.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    cap = degree_cap() if cap is None else cap
    if n > cap:
        raise ValueError(f"n={n} exceeds degree cap {cap}")
    if plain_degree is None:
        plain_degree = min(max(2 * n - 1, n), cap)
    plain = compute_recurrence(spec, max(plain_degree, n), "plain", cap=cap)
    circle = compute_recurrence(spec, n - 1, "circle", cap=cap)
    return Tables(spec, n, plain, circle)


def sgn(a):
    return 1.0 if a > 0 else (-1.0 if a < 0 else 0.0)


def eval_P(tables, a, x):
    """P_a(x) = phi(x) - a (1 - sgn(a) x) psi(x) and its derivative."""
    if not math.isfinite(a):
        raise MisuseError("P_a is undefined for infinite a; use eval_psi (Lobatto case)")
    _check_x(x)
    f, df = tables.phi(x)
    if a == 0:
        return PolyEval(f, df)
    g, dg = tables.psi(x)
    s = sgn(a)
    x = np.asarray(x, dtype=float) if np.ndim(x) else float(x)
    value = f - a * (1.0 - s * x) * g
    deriv = df - a * (1.0 - s * x) * dg + a * s * g
    return PolyEval(value, deriv)


def truncate_x(x, gaussian_nodes):
    """Clamp x to [xi_1(0), xi_n(0)]."""
    return np.clip(x, gaussian_nodes[0], gaussian_nodes[-1])


def write_recurrence_csv(table, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("k,alpha,beta,norm\n")
        for k in range(table.K + 1):
            fh.write(f"{k},{table.alpha[k]:.17g},{table.beta[k]:.17g},{table.norms[k]:.17g}\n")
