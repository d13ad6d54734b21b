"""Canonical representations: Gaussian, Lobatto and the quadrature through x.

Every x in (-1, 1) is a node of exactly one positive quadrature of degree
2n - 1 whose index (interior nodes count 2, endpoints 1) is at most 2n + 1.
It is identified by a pair (r, a): x is the r-th zero of P_a, with a = 0
for the Gaussian rule and a = +-inf for the Lobatto rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import orthopoly, weightfn
from .errors import ClassificationError, DomainError, NumericalError
from .orthopoly import sgn

LOBATTO_TOL = 1e-9
GAUSS_TOL = 1e-12
ROOT_FTOL = 1e-13
ROOT_XTOL = 1e-14
MAX_NEWTON = 200


@dataclass(frozen=True)
class CanonicalParam:
    r: int
    a: float

    @property
    def is_lobatto(self):
        return math.isinf(self.a)

    @property
    def is_gaussian(self):
        return self.a == 0.0

    def serialize(self):
        """(sign, 1/a): stays finite and monotone through the Lobatto band."""
        return sgn(self.a) if not self.is_lobatto else math.copysign(1.0, self.a), (
            0.0 if self.is_lobatto else (math.inf if self.a == 0 else 1.0 / self.a)
        )


@dataclass(frozen=True)
class NodeEntry:
    position: float
    weight: float
    index: int


@dataclass(frozen=True, eq=False)
class CanonicalRep:
    param: CanonicalParam
    nodes: np.ndarray
    weights: np.ndarray
    indices: np.ndarray
    n: int
    x: float | None = None

    @property
    def degree(self):
        return 2 * self.n - 1

    @property
    def entries(self):
        return [NodeEntry(float(u), float(w), int(i)) for u, w, i in zip(self.nodes, self.weights, self.indices)]

    @property
    def total_index(self):
        return int(self.indices.sum())

    @property
    def interior(self):
        return self.nodes[self.indices == 2]

    def weight_at(self, u):
        hit = np.nonzero(self.nodes == u)[0]
        return float(self.weights[hit[0]]) if hit.size else 0.0

    def position_of_x(self):
        return int(np.nonzero(self.nodes == self.x)[0][0])


# ---------------------------------------------------------------- principal nodes


def _jacobi_eig(table, k, vectors=False):
    if k == 1:
        nodes = np.array([table.alpha[0]])
        return (nodes, np.ones((1, 1))) if vectors else nodes
    d = np.array(table.alpha[:k])
    e = np.sqrt(np.array(table.beta[1:k]))
    try:
        if vectors:
            return eigh_tridiagonal(d, e)
        return eigh_tridiagonal(d, e, eigvals_only=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"tridiagonal eigen-solve failed: {exc}") from exc


def _polish(table, k, nodes, steps=2):
    for _ in range(steps):
        f, df = orthopoly.orthonormal(table, k, nodes)
        nodes = nodes - f / df
    return nodes


def gaussian_nodes_weights(tables):
    cache = tables.cache
    if "gauss" not in cache:
        n = tables.n
        nodes, vecs = _jacobi_eig(tables.plain, n, vectors=True)
        weights = tables.mass * vecs[0] ** 2
        nodes = _polish(tables.plain, n, nodes)
        cache["gauss"] = (nodes, weights)
    return cache["gauss"]


def gaussian_nodes(tables):
    return gaussian_nodes_weights(tables)[0]


def lobatto_interior(tables):
    """eta_1 < ... < eta_{n-1}: zeros of psi."""
    cache = tables.cache
    if "eta" not in cache:
        n = tables.n
        if n == 1:
            eta = np.zeros(0)
        else:
            eta = _polish(tables.circle, n - 1, _jacobi_eig(tables.circle, n - 1))
        cache["eta"] = eta
    return cache["eta"]


def eta_all(tables):
    """eta_0 = -1, eta_1, ..., eta_n = 1."""
    return np.concatenate([[-1.0], lobatto_interior(tables), [1.0]])


# ---------------------------------------------------------------- P_a roots


def _P_scaled(tables, a, x):
    """P_a(x) / max(1, |a|), its derivative, and a magnitude scale."""
    f, df = tables.phi(x)
    g, dg = tables.psi(x)
    s = sgn(a)
    c = 1.0 / max(1.0, abs(a))
    ac = a * c
    lin = 1.0 - s * x
    value = c * f - ac * lin * g
    deriv = c * df - ac * lin * dg + ac * s * g
    scale = np.abs(c * f) + np.abs(ac * lin * g)
    return value, deriv, scale


def xi_nodes(tables, a):
    """All n zeros xi_1(a) < ... < xi_n(a) of P_a, a finite.

    Bisection-safeguarded Newton inside the brackets (eta_{i-1}, eta_i).
    """
    if not math.isfinite(a):
        eta = eta_all(tables)
        return eta[1:].copy() if a > 0 else eta[:-1].copy()
    if a == 0:
        return gaussian_nodes(tables).copy()
    eta = eta_all(tables)
    lo = eta[:-1].copy()
    hi = eta[1:].copy()
    f_lo, _, _ = _P_scaled(tables, a, lo)
    f_hi, _, _ = _P_scaled(tables, a, hi)
    if np.any(np.sign(f_lo) * np.sign(f_hi) >= 0):
        bad = int(np.nonzero(np.sign(f_lo) * np.sign(f_hi) >= 0)[0][0]) + 1
        raise NumericalError(f"P_a root not bracketed for i={bad}, a={a!r}")
    x = np.clip(gaussian_nodes(tables).copy(), lo, hi)
    active = np.ones_like(x, dtype=bool)
    for _ in range(MAX_NEWTON):
        f, df, scale = _P_scaled(tables, a, x)
        done = (np.abs(f) <= ROOT_FTOL * scale) | (hi - lo <= ROOT_XTOL)
        active &= ~done
        if not active.any():
            break
        left = np.sign(f) == np.sign(f_lo)
        lo = np.where(active & left, x, lo)
        hi = np.where(active & ~left, x, hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = x - f / df
        bad = ~np.isfinite(step) | (step <= lo) | (step >= hi)
        step = np.where(bad, 0.5 * (lo + hi), step)
        moved = np.abs(step - x)
        x = np.where(active, step, x)
        active &= moved > 4.0 * np.finfo(float).eps * np.maximum(np.abs(x), 1e-300)
        if not active.any():
            break
    else:
        raise NumericalError(f"P_a root iteration did not converge for a={a!r}")
    return x


def xi_of_a(tables, i, a):
    """The unique zero of P_a in (eta_{i-1}, eta_i)."""
    if not 1 <= i <= tables.n:
        raise ValueError(f"node index {i} outside 1..{tables.n}")
    return float(xi_nodes(tables, a)[i - 1])


# ---------------------------------------------------------------- classification


def param_of_x(tables, x):
    """The pair (r, a) with x = xi_r(a)."""
    x = float(x)
    if not -1.0 < x < 1.0:
        raise DomainError("canonical parameter defined on the open interval only")
    n = tables.n
    eta = eta_all(tables)
    r = int(np.searchsorted(eta[1:-1], x, side="right")) + 1
    f, df = tables.phi(x)
    g, dg = tables.psi(x)

    if n > 1:
        j = int(np.argmin(np.abs(eta[1:-1] - x)))
        spacing = min(eta[j + 1] - eta[j], eta[j + 2] - eta[j + 1])
        if abs(g) <= LOBATTO_TOL * abs(dg) * spacing:
            return CanonicalParam(j + 1, math.inf)

    gauss = gaussian_nodes(tables)
    k = int(np.argmin(np.abs(gauss - x)))
    h = np.diff(np.concatenate([[-1.0], gauss, [1.0]]))
    if abs(f) <= GAUSS_TOL * abs(df) * min(h[k], h[k + 1]):
        return CanonicalParam(k + 1, 0.0)

    a_plus = f / ((1.0 - x) * g)
    a_minus = f / ((1.0 + x) * g)
    plus_ok = a_plus >= 0
    minus_ok = a_minus < 0
    if plus_ok == minus_ok:
        raise ClassificationError(
            f"ambiguous canonical parameter at x={x!r}: a+={a_plus!r}, a-={a_minus!r}"
        )
    return CanonicalParam(r, float(a_plus if plus_ok else a_minus))


# ---------------------------------------------------------------- weights


def _node_polys(nodes, indices, t):
    """Values at t of the interpolation basis used for the weights.

    Row j is 1 at nodes[j] and 0 at every other node, with double zeros at
    interior nodes (a single zero at the interior node nearest to an
    endpoint row), so every row has degree sum(indices) - 2.
    """
    nodes = np.asarray(nodes, dtype=float)
    N = nodes.size
    exps = np.tile(indices.astype(float), (N, 1))
    np.fill_diagonal(exps, 0.0)
    interior = np.nonzero(indices == 2)[0]
    for j in np.nonzero(indices == 1)[0]:
        if interior.size:
            nearest = interior[np.argmin(np.abs(nodes[interior] - nodes[j]))]
            exps[j, nearest] = 1.0
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    num = t[None, :] - nodes[:, None]
    out = np.empty((N, t.size))
    for j in range(N):
        ratio = num / diff[j][:, None]
        ratio = np.where((exps[j] == 2)[:, None], ratio * ratio, np.where((exps[j] == 1)[:, None], ratio, 1.0))
        out[j] = np.prod(ratio, axis=0)
    return out


def hermite_weights(nodes, indices, tables):
    """Weight of each node: the w-integral of its interpolation basis polynomial."""
    nodes = np.asarray(nodes, dtype=float)
    indices = np.asarray(indices)
    degree = max(int(indices.sum()) - 2, 0)
    t, wq = weightfn.quadrature_rule(tables.spec, degree)
    basis = _node_polys(nodes, indices, np.asarray(t))
    weights = basis @ np.asarray(wq)
    if np.any(~(weights > 0)):
        j = int(np.argmin(weights))
        raise NumericalError(f"non-positive quadrature weight {weights[j]!r} at node {nodes[j]!r}")
    return weights


def _indices_for(nodes):
    return np.where(np.abs(nodes) == 1.0, 1, 2)


def _make_rep(tables, param, nodes, x=None, weights=None):
    nodes = np.asarray(nodes, dtype=float)
    indices = _indices_for(nodes)
    if weights is None:
        weights = hermite_weights(nodes, indices, tables)
    for arr in (nodes, weights, indices):
        arr.setflags(write=False)
    return CanonicalRep(param, nodes, weights, indices, tables.n, x)


def gaussian_rep(tables):
    nodes, weights = gaussian_nodes_weights(tables)
    return _make_rep(tables, CanonicalParam(1, 0.0), nodes.copy(), weights=weights.copy())


def lobatto_rep(tables):
    return _make_rep(tables, CanonicalParam(1, math.inf), eta_all(tables))


def rep_of_x(tables, x, param=None):
    """The canonical representation having x as a node."""
    x = float(x)
    if param is None:
        param = param_of_x(tables, x)
    r, a = param.r, param.a
    if math.isinf(a):
        nodes = eta_all(tables)
        nodes[r] = x
    else:
        inner = xi_nodes(tables, a)
        inner[r - 1] = x
        if a > 0:
            nodes = np.concatenate([[-1.0], inner])
        elif a < 0:
            nodes = np.concatenate([inner, [1.0]])
        else:
            nodes = inner
    if np.any(np.diff(nodes) <= 0):
        raise NumericalError(f"canonical nodes not strictly increasing at x={x!r}")
    return _make_rep(tables, param, nodes, x=x)


# ---------------------------------------------------------------- exactness


def _basis_table(tables, k_max):
    if tables.plain.K >= k_max:
        return tables.plain
    key = ("basis", k_max)
    if key not in tables.cache:
        tables.cache[key] = orthopoly.compute_recurrence(tables.spec, k_max, "plain", cap=k_max)
    return tables.cache[key]


def exactness_residual(rep, tables):
    """Max over degrees k <= 2n-1 of |sum w_i phi_k(t_i) - int phi_k w| / sqrt(mass)."""
    k_max = 2 * rep.n - 1
    table = _basis_table(tables, k_max)
    t, wq = weightfn.quadrature_rule(tables.spec, k_max)
    exact = orthopoly.orthonormal_basis(table, k_max, t) @ np.asarray(wq)
    quad = orthopoly.orthonormal_basis(table, k_max, rep.nodes) @ rep.weights
    return float(np.max(np.abs(quad - exact)) / math.sqrt(table.beta[0]))


def write_rep_csv(rep, path):
    sign, inv_a = rep.param.serialize()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# n={rep.n},r={rep.param.r},a={rep.param.a:.17g},sign={sign:g},inv_a={inv_a:.17g}\n")
        fh.write("u,weight,index\n")
        for u, w, i in zip(rep.nodes, rep.weights, rep.indices):
            fh.write(f"{u:.17g},{w:.17g},{int(i)}\n")
