"""Brute-force reference computations, independent of the main code path.

Rational arithmetic (fractions) and 30-digit arithmetic (mpmath) on the raw
moments of polynomial pieces. These are slow and ill-conditioned by design;
they are only meant for small degrees.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath

from .. import extremal

ORACLE_DPS = 30


def _poly_pieces(spec):
    for piece in spec.pieces:
        if piece.kind != "polynomial":
            raise ValueError("rational oracles need polynomial pieces")
        yield piece


def rational_integral(spec, coeffs, lo=-1.0, hi=1.0):
    """Exact integral of p(t) w(t) over [lo, hi] (polynomial pieces only)."""
    lo, hi = Fraction(lo), Fraction(hi)
    p = [Fraction(c) for c in coeffs]
    total = Fraction(0)
    for piece in _poly_pieces(spec):
        a, b = max(lo, Fraction(piece.lo)), min(hi, Fraction(piece.hi))
        if b <= a:
            continue
        wc = [Fraction(c) for c in piece.coeffs]
        prod = [Fraction(0)] * (len(p) + len(wc) - 1)
        for i, x in enumerate(p):
            for j, y in enumerate(wc):
                prod[i + j] += x * y
        total += sum(c * (b ** (k + 1) - a ** (k + 1)) / (k + 1) for k, c in enumerate(prod))
    return total


def rational_moments(spec, count):
    """mu_k = int t^k w(t) dt, k < count, as exact fractions."""
    return [rational_integral(spec, [0] * k + [1]) for k in range(count)]


def _stieltjes_from_moments(mu, K, zero, to_num):
    """Monic recurrence coefficients by Gram-Schmidt on the monomials."""

    def inner(p, q):
        return sum(to_num(pi) * to_num(qj) * mu[i + j] for i, pi in enumerate(p) for j, qj in enumerate(q))

    def times_t(p):
        return [zero] + list(p)

    alpha, beta = [], [mu[0]]
    prev, cur = [zero], [to_num(1)]
    norm_prev = None
    for k in range(K + 1):
        norm = inner(cur, cur)
        if k:
            beta.append(norm / norm_prev)
        a = inner(times_t(cur), cur) / norm
        alpha.append(a)
        if k == K:
            break
        tp = times_t(cur)
        nxt = [tp[i] - a * (cur[i] if i < len(cur) else zero) - (beta[k] if k else zero) * (prev[i] if i < len(prev) else zero) for i in range(len(tp))]
        prev, cur, norm_prev = cur, nxt, norm
    return alpha, beta


def rational_recurrence(spec, K):
    """(alpha, beta) as exact fractions; beta[0] is the mass."""
    mu = rational_moments(spec, 2 * K + 2)
    return _stieltjes_from_moments(mu, K, Fraction(0), Fraction)


def mp_recurrence(spec, K, dps=ORACLE_DPS):
    """(alpha, beta) as mpf numbers computed with ``dps`` significant digits."""
    with mpmath.workdps(dps):
        mu = [mpmath.mpf(m.numerator) / m.denominator for m in rational_moments(spec, 2 * K + 2)]
        return _stieltjes_from_moments(mu, K, mpmath.mpf(0), mpmath.mpf)


def legendre_beta(k):
    """Exact monic Legendre recurrence coefficient k^2 / (4k^2 - 1), k >= 1."""
    return Fraction(k * k, 4 * k * k - 1)


def hermite_newton(nodes, mult, values, t, dps=ORACLE_DPS):
    """Confluent Newton divided-difference interpolant with zero slopes at
    double nodes, evaluated in extended precision at the points t."""
    with mpmath.workdps(dps):
        z, f = [], []
        for u, m, v in zip(nodes, mult, values):
            for _ in range(int(m)):
                z.append(mpmath.mpf(float(u)))
                f.append(mpmath.mpf(float(v)))
        N = len(z)
        table = [list(f)]
        for level in range(1, N):
            prev = table[-1]
            row = []
            for i in range(N - level):
                if z[i + level] == z[i]:
                    row.append(mpmath.mpf(0))  # repeated node: prescribed slope is zero
                else:
                    row.append((prev[i + 1] - prev[i]) / (z[i + level] - z[i]))
            table.append(row)
        coef = [table[k][0] for k in range(N)]
        out = []
        for x in t:
            x = mpmath.mpf(float(x))
            acc = coef[-1]
            for k in range(N - 2, -1, -1):
                acc = acc * (x - z[k]) + coef[k]
            out.append(float(acc))
        return out


def finite_difference_pi_prime(tables, x, h=1e-5):
    """Centered difference of pi, built only from partial weight sums."""
    return extremal.finite_difference_pi(tables, x, h)
