"""Piecewise-regular weight functions on [-1, 1].

A :class:`WeightSpec` is an ordered list of pieces tiling [-1, 1]. Each piece
is a polynomial, the reciprocal of a polynomial, or a tabulated sample set
reconstructed by monotone piecewise-cubic (PCHIP) interpolation.

Integration against polynomials goes through composite quadrature rules that
never straddle a piece boundary: Gauss-Legendre of sufficient order on
polynomial and tabulated pieces (exact), adaptive Gauss-Legendre subdivision
on reciprocal pieces.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.interpolate import PchipInterpolator

from .errors import ConvergenceError, DomainError, WeightSpecError

PIECE_KINDS = ("polynomial", "reciprocal", "tabulated")
REGULARITY_KINDS = ("lipschitz", "sobolev", "piecewise-abs-cont")

REL_TOL = 1e-13
ABS_FLOOR = 1e-15
MAX_SUBINTERVALS = 4096
BOUND_SLACK = 1e-12


@lru_cache(maxsize=None)
def gauss_legendre(k):
    """Nodes and weights of the k-point Gauss-Legendre rule on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(k)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _mapped_rule(k, lo, hi):
    x, w = gauss_legendre(k)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


@dataclass(frozen=True)
class Piece:
    kind: str
    lo: float
    hi: float
    coeffs: tuple = ()
    samples: tuple = ()
    _pchip: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        object.__setattr__(
            self, "samples", tuple((float(t), float(v)) for t, v in self.samples)
        )
        if self.kind == "tabulated" and len(self.samples) >= 2:
            ts, vs = zip(*self.samples)
            if all(b > a for a, b in zip(ts, ts[1:])):
                object.__setattr__(self, "_pchip", PchipInterpolator(ts, vs))

    @property
    def degree(self):
        """Polynomial degree on each smooth sub-cell, or None if not polynomial."""
        if self.kind == "polynomial":
            return max(len(self.coeffs) - 1, 0)
        if self.kind == "tabulated":
            return 3
        return None

    def cells(self, lo, hi):
        """Sub-intervals of [lo, hi] on which the piece is smooth."""
        if self.kind != "tabulated":
            return [(lo, hi)]
        knots = [t for t, _ in self.samples if lo < t < hi]
        edges = [lo, *knots, hi]
        return list(zip(edges[:-1], edges[1:]))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "polynomial":
            return npoly.polyval(t, self.coeffs)
        if self.kind == "reciprocal":
            return 1.0 / npoly.polyval(t, self.coeffs)
        return self._pchip(t)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "polynomial":
            return npoly.polyval(t, npoly.polyder(self.coeffs)) if len(self.coeffs) > 1 else np.zeros_like(t)
        if self.kind == "reciprocal":
            q = npoly.polyval(t, self.coeffs)
            dq = npoly.polyval(t, npoly.polyder(self.coeffs)) if len(self.coeffs) > 1 else 0.0
            return -dq / q**2
        return self._pchip.derivative()(t)


@dataclass(frozen=True)
class Regularity:
    kind: str = "piecewise-abs-cont"
    R: float | None = None
    p: float | None = None
    norm: float | None = None


@dataclass(frozen=True)
class WeightSpec:
    pieces: tuple
    breakpoints: tuple = ()
    regularity: Regularity = Regularity()
    m: float = 1.0
    M: float = 1.0
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        object.__setattr__(self, "breakpoints", tuple(float(s) for s in self.breakpoints))
        try:
            key = json.dumps(to_dict(self), sort_keys=True)
        except (AttributeError, TypeError, ValueError):
            key = repr((self.pieces, self.breakpoints, self.regularity, self.m, self.M))
        object.__setattr__(self, "_key", key)

    def __call__(self, t):
        return eval_weight(self, t)

    def __hash__(self):
        return hash(self._key)

    def __eq__(self, other):
        return isinstance(other, WeightSpec) and self._key == other._key


@dataclass
class ValidationReport:
    ok: bool
    failures: list = field(default_factory=list)  # (invariant, message, witness)

    def __bool__(self):
        return self.ok

    def summary(self):
        if self.ok:
            return "pass"
        return "; ".join(f"{inv}: {msg} (witness {wit})" for inv, msg, wit in self.failures)


# ---------------------------------------------------------------- validation


def _check_structure(spec):
    if not spec.pieces:
        raise WeightSpecError("weight spec has no pieces", piece_index=0)
    for i, piece in enumerate(spec.pieces):
        if not isinstance(piece, Piece):
            raise WeightSpecError(f"piece {i} is not a Piece", piece_index=i)
        if piece.kind not in PIECE_KINDS:
            raise WeightSpecError(f"piece {i} has unknown kind {piece.kind!r}", piece_index=i)
        if not (math.isfinite(piece.lo) and math.isfinite(piece.hi)) or piece.lo >= piece.hi:
            raise WeightSpecError(f"piece {i} has empty or invalid support", piece_index=i)
        if piece.kind in ("polynomial", "reciprocal") and not piece.coeffs:
            raise WeightSpecError(f"piece {i} has no coefficients", piece_index=i)
        if piece.kind == "tabulated":
            if len(piece.samples) < 2 or piece._pchip is None:
                raise WeightSpecError(
                    f"piece {i} needs at least two strictly increasing samples", piece_index=i
                )
            ts = [t for t, _ in piece.samples]
            if ts[0] != piece.lo or ts[-1] != piece.hi:
                raise WeightSpecError(f"piece {i} samples must span [lo, hi]", piece_index=i)
    if spec.regularity.kind not in REGULARITY_KINDS:
        raise WeightSpecError(f"unknown regularity {spec.regularity.kind!r}")


def validate(spec, n_samples=10_000, seed=0):
    """Check every invariant of ``spec``; structural defects raise instead."""
    _check_structure(spec)
    failures = []
    bps = spec.breakpoints
    for s in bps:
        if not -1.0 < s < 1.0:
            failures.append(("breakpoints", "breakpoint outside (-1,1)", s))
    for a, b in zip(bps, bps[1:]):
        if not b > a:
            failures.append(("breakpoints", "breakpoints not strictly increasing", b))

    pieces = spec.pieces
    if pieces[0].lo != -1.0:
        failures.append(("tiling", "first piece does not start at -1", pieces[0].lo))
    if pieces[-1].hi != 1.0:
        failures.append(("tiling", "last piece does not end at 1", pieces[-1].hi))
    for i, (p, q) in enumerate(zip(pieces, pieces[1:])):
        if p.hi != q.lo:
            kind = "gap" if p.hi < q.lo else "overlap"
            failures.append(("tiling", f"{kind} between pieces {i} and {i + 1}", p.hi))
    internal = tuple(p.hi for p in pieces[:-1])
    if internal != bps:
        failures.append(("tiling", "breakpoints do not match piece boundaries", internal))

    if not spec.m > 0:
        failures.append(("bounds", "lower bound m must be positive", spec.m))
    if spec.M < spec.m:
        failures.append(("bounds", "upper bound M below lower bound m", spec.M))

    if not failures:
        rng = np.random.default_rng(seed)
        ts = np.concatenate([
            np.linspace(-1.0, 1.0, n_samples // 2),
            rng.uniform(-1.0, 1.0, n_samples - n_samples // 2),
        ])
        vals = eval_weight(spec, ts)
        edge_t, edge_v = [], []
        for piece in pieces:
            edge_t += [piece.lo, piece.hi]
            edge_v += list(piece(np.array([piece.lo, piece.hi])))
        ts = np.concatenate([ts, edge_t])
        vals = np.concatenate([vals, edge_v])
        bad = ~np.isfinite(vals)
        if bad.any():
            failures.append(("finite", "weight not finite", float(ts[bad][0])))
        else:
            lo_bad = vals < spec.m - BOUND_SLACK
            hi_bad = vals > spec.M + BOUND_SLACK
            if lo_bad.any():
                failures.append(("bounds", "w(t) < m", float(ts[lo_bad][np.argmin(vals[lo_bad])])))
            if hi_bad.any():
                failures.append(("bounds", "w(t) > M", float(ts[hi_bad][np.argmax(vals[hi_bad])])))
    return ValidationReport(ok=not failures, failures=failures)


def require_valid(spec):
    report = validate(spec)
    if not report:
        inv, msg, wit = report.failures[0]
        raise WeightSpecError(f"{inv}: {msg}", witness=wit)
    return spec


# ---------------------------------------------------------------- evaluation


def _piece_index(spec, t):
    """Index of the piece whose half-open support [lo, hi) contains t."""
    his = np.array([p.hi for p in spec.pieces[:-1]])
    return np.searchsorted(his, t, side="right")


def _check_domain(t):
    if np.any(~np.isfinite(t)) or np.any(t < -1.0) or np.any(t > 1.0):
        raise DomainError("evaluation point outside [-1, 1]")


def eval_weight(spec, t):
    """w(t); at a breakpoint the right limit w(s+) is returned."""
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    _check_domain(t)
    idx = _piece_index(spec, t)
    out = np.empty_like(t)
    for i, piece in enumerate(spec.pieces):
        sel = idx == i
        if sel.any():
            out[sel] = piece(t[sel])
    return float(out[0]) if scalar else out


def left_limit(spec, t):
    """w(t-): the limit from the left (equal to w(t) away from breakpoints)."""
    t = float(t)
    _check_domain(np.array([t]))
    for piece in spec.pieces:
        if piece.lo < t <= piece.hi:
            return float(piece(t))
    return float(spec.pieces[0](t))


def eval_weight_derivative(spec, t):
    """w'(t) piecewise (right derivative at breakpoints)."""
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    _check_domain(t)
    idx = _piece_index(spec, t)
    out = np.empty_like(t)
    for i, piece in enumerate(spec.pieces):
        sel = idx == i
        if sel.any():
            out[sel] = piece.derivative(t[sel])
    return float(out[0]) if scalar else out


def jumps(spec, tol=0.0):
    """List of (s, w(s-), w(s+)) at breakpoints where w is discontinuous."""
    out = []
    for s in spec.breakpoints:
        left, right = left_limit(spec, s), eval_weight(spec, s)
        if abs(right - left) > tol * max(abs(left), abs(right), 1.0):
            out.append((s, left, right))
    return out


# ---------------------------------------------------------------- integration


def _gl_points(degree):
    return max(degree // 2 + 1, 1)


def _adaptive_cell_rule(piece, lo, hi, degree):
    """Composite Gauss-Legendre rule for piece(t) * poly(t), poly of ``degree``.

    Each cell is accepted once the k- and 2k-point rules agree on the first
    ``degree + 1`` Chebyshev polynomials (mapped to [lo, hi]) to the
    relative tolerance.
    """
    k = max(_gl_points(degree) + 2, 10)
    span = hi - lo
    cheb_eye = np.eye(degree + 1)

    def tests(t):
        u = (2.0 * t - (lo + hi)) / span
        return np.polynomial.chebyshev.chebval(u, cheb_eye) * piece(t)

    def estimate(a, b):
        x1, w1 = _mapped_rule(k, a, b)
        x2, w2 = _mapped_rule(2 * k, a, b)
        i1 = tests(x1) @ w1
        i2 = tests(x2) @ w2
        return x2, w2, float(np.max(np.abs(i2 - i1))), abs(float(i2[0]))

    _, _, _, total = estimate(lo, hi)
    nodes, weights = [], []
    stack = [(lo, hi)]
    worst = 0.0
    count = 0
    while stack:
        a, b = stack.pop()
        count += 1
        x, w, err, _ = estimate(a, b)
        frac = (b - a) / span
        tol = max(REL_TOL * total * frac, ABS_FLOOR * frac)
        if err <= tol or count > MAX_SUBINTERVALS:
            if err > tol:
                worst = max(worst, err / max(total, ABS_FLOOR))
            nodes.append(x)
            weights.append(w * piece(x))
            continue
        mid = 0.5 * (a + b)
        stack.append((mid, b))
        stack.append((a, mid))
    if worst > 0.0:
        raise ConvergenceError("adaptive integration did not converge", worst)
    order = np.argsort(np.concatenate([n[:1] for n in nodes]))
    return (
        np.concatenate([nodes[i] for i in order]),
        np.concatenate([weights[i] for i in order]),
    )


def _piece_rule(piece, lo, hi, degree):
    if piece.kind == "reciprocal":
        return _adaptive_cell_rule(piece, lo, hi, degree)
    k = _gl_points(degree + piece.degree)
    xs, ws = [], []
    for a, b in piece.cells(lo, hi):
        x, w = _mapped_rule(k, a, b)
        xs.append(x)
        ws.append(w * piece(x))
    return np.concatenate(xs), np.concatenate(ws)


@lru_cache(maxsize=4096)
def _cached_rule(spec, degree, lo, hi):
    xs, ws = [], []
    for piece in spec.pieces:
        a, b = max(lo, piece.lo), min(hi, piece.hi)
        if b > a:
            x, w = _piece_rule(piece, a, b, degree)
            xs.append(x)
            ws.append(w)
    if not xs:
        empty = np.zeros(0)
        return empty, empty
    x, w = np.concatenate(xs), np.concatenate(ws)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def quadrature_rule(spec, degree, lo=-1.0, hi=1.0):
    """Positive discrete measure (nodes, weights) reproducing
    ``integral_lo^hi p(t) w(t) dt`` for every polynomial p of degree <= ``degree``.
    """
    lo, hi = float(lo), float(hi)
    _check_domain(np.array([lo, hi]))
    if lo > hi:
        raise DomainError("integration bounds reversed")
    return _cached_rule(spec, int(degree), lo, hi)


def integrate(spec, f, degree, lo=-1.0, hi=1.0):
    """Integral of f(t) w(t) over [lo, hi], f a vectorised polynomial of ``degree``."""
    x, w = quadrature_rule(spec, degree, lo, hi)
    if x.size == 0:
        return 0.0
    return math.fsum(np.asarray(f(x), dtype=float) * w)


def integrate_poly(spec, poly, lo=-1.0, hi=1.0):
    """Integral of p(t) w(t) over [lo, hi]; ``poly`` is an ascending
    monomial coefficient vector or a numpy polynomial series object."""
    if hasattr(poly, "degree") and callable(poly):
        return integrate(spec, poly, poly.degree(), lo, hi)
    coeffs = np.atleast_1d(np.asarray(poly, dtype=float))
    return integrate(spec, lambda t: npoly.polyval(t, coeffs), len(coeffs) - 1, lo, hi)


def total_mass(spec):
    return integrate_poly(spec, [1.0], -1.0, 1.0)


def cumulative_mass(spec, x):
    """integral_{-1}^{x} w(t) dt for scalar or array x."""
    if np.ndim(x) == 0:
        return integrate_poly(spec, [1.0], -1.0, float(x))
    return np.array([integrate_poly(spec, [1.0], -1.0, float(v)) for v in np.ravel(x)])


# ---------------------------------------------------------------- transforms


def _reflect_piece(piece):
    if piece.kind == "tabulated":
        samples = tuple((-t, v) for t, v in reversed(piece.samples))
        return Piece("tabulated", -piece.hi, -piece.lo, samples=samples)
    coeffs = tuple(c * (-1) ** k for k, c in enumerate(piece.coeffs))
    return Piece(piece.kind, -piece.hi, -piece.lo, coeffs=coeffs)


def reversed_spec(spec):
    """The reflected weight t -> w(-t).

    Breakpoint conventions flip: the reflected spec is right-continuous only
    if ``spec`` was left-continuous, which is irrelevant for integrals.
    """
    pieces = tuple(_reflect_piece(p) for p in reversed(spec.pieces))
    return WeightSpec(
        pieces=pieces,
        breakpoints=tuple(-s for s in reversed(spec.breakpoints)),
        regularity=spec.regularity,
        m=spec.m,
        M=spec.M,
        name=f"{spec.name}-reversed" if spec.name else "reversed",
    )


def scaled_spec(spec, factor):
    """The weight factor * w(t)."""
    factor = float(factor)
    pieces = []
    for p in spec.pieces:
        if p.kind == "polynomial":
            pieces.append(Piece(p.kind, p.lo, p.hi, coeffs=tuple(c * factor for c in p.coeffs)))
        elif p.kind == "reciprocal":
            pieces.append(Piece(p.kind, p.lo, p.hi, coeffs=tuple(c / factor for c in p.coeffs)))
        else:
            pieces.append(Piece(p.kind, p.lo, p.hi, samples=tuple((t, v * factor) for t, v in p.samples)))
    reg = spec.regularity
    if reg.R is not None or reg.norm is not None:
        reg = Regularity(
            reg.kind,
            R=None if reg.R is None else reg.R * factor,
            p=reg.p,
            norm=None if reg.norm is None else reg.norm * factor,
        )
    return WeightSpec(
        pieces=tuple(pieces),
        breakpoints=spec.breakpoints,
        regularity=reg,
        m=spec.m * factor,
        M=spec.M * factor,
        name=f"{spec.name}x{factor:g}",
    )


# ---------------------------------------------------------------- built-ins


def constant_weight(c=1.0):
    return WeightSpec(
        pieces=(Piece("polynomial", -1.0, 1.0, coeffs=(c,)),),
        regularity=Regularity("lipschitz", R=0.0),
        m=c,
        M=c,
        name="constant",
    )


def ramp_weight():
    """w(t) = max{1, 1 + 4t}."""
    return WeightSpec(
        pieces=(
            Piece("polynomial", -1.0, 0.0, coeffs=(1.0,)),
            Piece("polynomial", 0.0, 1.0, coeffs=(1.0, 4.0)),
        ),
        breakpoints=(0.0,),
        regularity=Regularity("lipschitz", R=4.0),
        m=1.0,
        M=5.0,
        name="ramp",
    )


def step_weight(left=1.0, right=5.0):
    """w(t) = left for t < 0, right for t >= 0."""
    return WeightSpec(
        pieces=(
            Piece("polynomial", -1.0, 0.0, coeffs=(left,)),
            Piece("polynomial", 0.0, 1.0, coeffs=(right,)),
        ),
        breakpoints=(0.0,),
        regularity=Regularity("piecewise-abs-cont"),
        m=min(left, right),
        M=max(left, right),
        name="step",
    )


def sqrt_ramp_weight(n_samples=401):
    """w(t) = 1 + sqrt(|t|), tabulated; w' is in L_p for p < 2 only."""
    u = np.linspace(0.0, 1.0, n_samples // 2 + 1) ** 2
    ts = np.concatenate([-u[::-1], u[1:]])
    vals = 1.0 + np.sqrt(np.abs(ts))
    return WeightSpec(
        pieces=(Piece("tabulated", -1.0, 1.0, samples=tuple(zip(ts, vals))),),
        regularity=Regularity("sobolev", p=1.5, norm=None),
        m=1.0,
        M=2.0,
        name="sqrt-ramp",
    )


def bump_weight():
    """w(t) = 1 / (1 + t^2 / 2): a smooth reciprocal-polynomial weight."""
    return WeightSpec(
        pieces=(Piece("reciprocal", -1.0, 1.0, coeffs=(1.0, 0.0, 0.5)),),
        regularity=Regularity("lipschitz", R=0.5),
        m=2.0 / 3.0,
        M=1.0,
        name="bump",
    )


BUILTIN = {
    "constant": constant_weight,
    "ramp": ramp_weight,
    "step": step_weight,
    "sqrt-ramp": sqrt_ramp_weight,
    "bump": bump_weight,
}


# ---------------------------------------------------------------- serialization


def _fmt(x):
    return format(float(x), ".17g")


def _emit(obj, indent=0):
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}  {json.dumps(k)}: {_emit(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_emit(v) for v in obj) + "]"
        items = [f"{pad}  {_emit(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError("non-finite real in weight spec")
        text = _fmt(obj)
        return text if any(c in text for c in ".en") else text + ".0"
    if isinstance(obj, int):
        return str(obj)
    return json.dumps(obj)


def to_dict(spec):
    pieces = []
    for p in spec.pieces:
        entry = {"type": p.kind, "lo": p.lo, "hi": p.hi}
        if p.kind == "tabulated":
            entry["samples"] = [[t, v] for t, v in p.samples]
        else:
            entry["coeffs"] = list(p.coeffs)
        pieces.append(entry)
    reg = {"kind": spec.regularity.kind}
    for key in ("R", "p", "norm"):
        val = getattr(spec.regularity, key)
        if val is not None:
            reg[key] = float(val)
    return {
        "name": spec.name,
        "breakpoints": list(spec.breakpoints),
        "pieces": pieces,
        "m": float(spec.m),
        "M": float(spec.M),
        "regularity": reg,
    }


def from_dict(data):
    try:
        pieces = []
        for i, entry in enumerate(data["pieces"]):
            try:
                kind = entry["type"]
                if kind == "tabulated":
                    piece = Piece(kind, entry["lo"], entry["hi"], samples=tuple(map(tuple, entry["samples"])))
                else:
                    piece = Piece(kind, entry["lo"], entry["hi"], coeffs=tuple(entry["coeffs"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise WeightSpecError(f"malformed piece {i}: {exc}", piece_index=i) from exc
            pieces.append(piece)
        reg = data.get("regularity", {"kind": "piecewise-abs-cont"})
        if isinstance(reg, str):
            reg = {"kind": reg}
        regularity = Regularity(reg["kind"], R=reg.get("R"), p=reg.get("p"), norm=reg.get("norm"))
        return WeightSpec(
            pieces=tuple(pieces),
            breakpoints=tuple(data.get("breakpoints", ())),
            regularity=regularity,
            m=float(data["m"]),
            M=float(data["M"]),
            name=str(data.get("name", "")),
        )
    except WeightSpecError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise WeightSpecError(f"malformed weight spec: {exc}") from exc


def dumps(spec):
    return _emit(to_dict(spec)) + "\n"


def loads(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WeightSpecError(f"weight spec is not valid JSON: {exc}") from exc
    return from_dict(data)


def load(path):
    """Load a weight spec file, or a built-in by name (``constant``, ``ramp``, ...)."""
    path = str(path)
    if path in BUILTIN:
        return BUILTIN[path]()
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def dump(spec, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(spec))


def digest(spec):
    return hashlib.sha256(spec._key.encode()).hexdigest()[:16]
