"""Truncated power series and the Lubin-Tate series built from them.

Two coordinates are supported and never mixed inside one computation:

* ST: the logarithm is the sparse series sum_k pi^(-k) Z^(q^k); everything
  else (exp, the group law, [a]) is derived from it by reversion and
  composition.
* COL: the Frobenius is fixed as [p](X) = pX + X^q and the logarithm is
  solved degree by degree from log([p](X)) = p log(X) with c_1 = 1.

One-variable series are coefficient lists of length bound+1; two-variable
series are triangular arrays coeffs[n][i] = coefficient of X^i Y^(n-i).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

from gmpy2 import mpq

from .extension import (
    ConsistencyError,
    fe_add,
    fe_from_mpq,
    fe_is_zero,
    fe_mul,
    fe_one,
    fe_pi_pow,
    fe_scale,
    fe_sub,
    fe_valuation,
    fe_zero,
)

ST = "ST"
COL = "COL"


class NotInImageError(Exception):
    """The series has no preimage under phi at the requested truncation."""


@dataclass
class TruncSeries:
    bound: int
    coeffs: list

    def coeff(self, n):
        return self.coeffs[n]


@dataclass
class TruncSeries2:
    bound: int
    coeffs: list  # coeffs[n][i]: X^i Y^(n-i)

    def coeff(self, i, j):
        return self.coeffs[i + j][i]


def _zeros(T, spec):
    return [fe_zero(spec)] * (T + 1)


def _check_coord(coord):
    if coord not in (ST, COL):
        raise ValueError(f"coordinate must be 'ST' or 'COL', got {coord!r}")


# ---------------------------------------------------------------------------
# raw coefficient-list arithmetic, everything truncated at T

def _mul_trunc(a, b, T, spec):
    out = _zeros(T, spec)
    for i, x in enumerate(a):
        if i > T:
            break
        if fe_is_zero(x):
            continue
        for j, y in enumerate(b):
            if i + j > T:
                break
            if not fe_is_zero(y):
                out[i + j] = fe_add(out[i + j], fe_mul(x, y, spec), spec)
    return out


def _compose_trunc(f, g, T, spec):
    """f(g) truncated at T; requires g(0) = 0."""
    if g and not fe_is_zero(g[0]):
        raise ValueError("composition requires inner series with zero constant term")
    out = _zeros(T, spec)
    if len(f) > T + 1:
        f = f[: T + 1]
    for c in reversed(f):
        out = _mul_trunc(out, g, T, spec)
        out[0] = fe_add(out[0], c, spec)
    return out


# ---------------------------------------------------------------------------
# logarithms

def _frobenius_poly(spec, T):
    """[p](X) = pX + X^q as a coefficient list, truncated at T."""
    out = _zeros(T, spec)
    if T >= 1:
        out[1] = fe_from_mpq(spec.p, spec)
    if T >= spec.q:
        out[spec.q] = fe_one(spec)
    return out


def _frob_power_coeff(m, n, p, q):
    """[X^n] of (pX + X^q)^m as a rational."""
    t, rem = divmod(n - m, q - 1)
    if rem or t < 0 or t > m:
        return mpq(0)
    return mpq(comb(m, t)) * mpq(p) ** (m - t)


def _log_st(spec, T):
    out = _zeros(T, spec)
    k = 0
    n = 1
    while n <= T:
        out[n] = fe_pi_pow(-k, spec)
        k += 1
        n *= spec.q
    return out


def _log_col(spec, T):
    # c_n (p - p^n) = sum_{m<n} c_m [X^n](pX+X^q)^m, c_1 = 1
    p, q = spec.p, spec.q
    c = [mpq(0)] * (T + 1)
    if T >= 1:
        c[1] = mpq(1)
    for n in range(2, T + 1):
        s = mpq(0)
        for m in range(1, n):
            if c[m] != 0:
                s += c[m] * _frob_power_coeff(m, n, p, q)
        if s != 0:
            c[n] = s / (p - mpq(p) ** n)
    return [fe_from_mpq(r, spec) for r in c]


@lru_cache(maxsize=64)
def _log_tuple(spec, coord, T):
    return tuple(_log_st(spec, T) if coord == ST else _log_col(spec, T))


@lru_cache(maxsize=64)
def _exp_tuple(spec, coord, T):
    L = list(_log_tuple(spec, coord, T))
    # powers of L, then solve sum_k e_k L^k = Z degree by degree
    pows = [None, L]
    for k in range(2, T + 1):
        pows.append(_mul_trunc(pows[-1], L, T, spec))
    e = _zeros(T, spec)
    e[1] = fe_one(spec)
    for n in range(2, T + 1):
        s = fe_zero(spec)
        for k in range(1, n):
            if not fe_is_zero(e[k]):
                s = fe_add(s, fe_mul(e[k], pows[k][n], spec), spec)
        # lead coefficient of L^n at degree n is 1
        e[n] = fe_sub(fe_zero(spec), s, spec)
    return tuple(e)


def log_lt(spec, coord, T):
    """The Lubin-Tate logarithm, truncated at degree T."""
    _check_coord(coord)
    if T < 1:
        raise ValueError("T must be >= 1")
    return TruncSeries(T, list(_log_tuple(spec, coord, T)))


def exp_lt(spec, coord, T):
    """Compositional inverse of log_lt, truncated at degree T."""
    _check_coord(coord)
    if T < 1:
        raise ValueError("T must be >= 1")
    return TruncSeries(T, list(_exp_tuple(spec, coord, T)))


def mult_by(spec, coord, a, T):
    """[a](Z) = exp(a log(Z)) for an integer a."""
    _check_coord(coord)
    if not isinstance(a, int):
        raise TypeError("mult_by takes an integer multiplier")
    aL = [fe_scale(c, a, spec) for c in _log_tuple(spec, coord, T)]
    e = list(_exp_tuple(spec, coord, T))
    return TruncSeries(T, _compose_trunc(e, aL, T, spec))


# ---------------------------------------------------------------------------
# two-variable series and the group law

def _ts2_zeros(T, spec):
    return [[fe_zero(spec)] * (n + 1) for n in range(T + 1)]


def _ts2_mul(a, b, T, spec):
    out = _ts2_zeros(T, spec)
    for n1 in range(T + 1):
        row1 = a[n1]
        for i1 in range(n1 + 1):
            x = row1[i1]
            if fe_is_zero(x):
                continue
            for n2 in range(T + 1 - n1):
                row2 = b[n2]
                for i2 in range(n2 + 1):
                    y = row2[i2]
                    if not fe_is_zero(y):
                        out[n1 + n2][i1 + i2] = fe_add(
                            out[n1 + n2][i1 + i2], fe_mul(x, y, spec), spec
                        )
    return out


def _ts2_embed(f, T, spec, axis):
    """One-variable coefficients placed along X (axis=0) or Y (axis=1)."""
    out = _ts2_zeros(T, spec)
    for n in range(min(len(f), T + 1)):
        if not fe_is_zero(f[n]):
            out[n][n if axis == 0 else 0] = f[n]
    return out


def _ts2_compose_1var(f, h2, T, spec):
    """f(h2) for one-variable f and two-variable h2 with zero constant term."""
    if not fe_is_zero(h2[0][0]):
        raise ValueError("composition requires inner series with zero constant term")
    out = _ts2_zeros(T, spec)
    if len(f) > T + 1:
        f = f[: T + 1]
    for c in reversed(f):
        out = _ts2_mul(out, h2, T, spec)
        out[0][0] = fe_add(out[0][0], c, spec)
    return out


def ts2_subst(F, u, v, T, spec):
    """F(u(X), v(Y)) for a two-variable F and one-variable u, v (both 0 at 0)."""
    for g in (u, v):
        if g and not fe_is_zero(g[0]):
            raise ValueError("substitution requires series vanishing at 0")
    xpow = {0: [fe_one(spec)]}
    ypow = {0: [fe_one(spec)]}

    def power(cache, g, k):
        if k not in cache:
            cache[k] = _mul_trunc(power(cache, g, k - 1), g, T, spec)
        return cache[k]

    out = _ts2_zeros(T, spec)
    for n in range(min(len(F.coeffs), T + 1)):
        for i in range(n + 1):
            c = F.coeffs[n][i]
            if fe_is_zero(c):
                continue
            px = power(xpow, u, i)
            py = power(ypow, v, n - i)
            for a, ca in enumerate(px):
                if a > T or fe_is_zero(ca):
                    continue
                cca = fe_mul(c, ca, spec)
                for b, cb in enumerate(py):
                    if a + b > T:
                        break
                    if not fe_is_zero(cb):
                        out[a + b][a] = fe_add(
                            out[a + b][a], fe_mul(cca, cb, spec), spec
                        )
    return TruncSeries2(T, out)


def group_law(spec, coord, T):
    """F(X,Y) = exp(log X + log Y); raises if any coefficient is non-integral."""
    _check_coord(coord)
    if T < 2:
        raise ValueError("T must be >= 2")
    L = log_lt(spec, coord, T).coeffs
    s2 = _ts2_embed(L, T, spec, 0)
    ly = _ts2_embed(L, T, spec, 1)
    for n in range(T + 1):
        for i in range(n + 1):
            s2[n][i] = fe_add(s2[n][i], ly[n][i], spec)
    e = exp_lt(spec, coord, T).coeffs
    F = _ts2_compose_1var(e, s2, T, spec)
    for n in range(T + 1):
        for i in range(n + 1):
            if not fe_is_zero(F[n][i]) and fe_valuation(F[n][i], spec) < 0:
                raise ConsistencyError(
                    f"group law coefficient X^{i} Y^{n - i} has negative valuation"
                )
    return TruncSeries2(T, F)


# ---------------------------------------------------------------------------
# phi and its partial inverse (COL coordinate)

def phi_apply(f, spec, T):
    """f([p](X)) truncated at T, with [p](X) = pX + X^q."""
    frob = _frobenius_poly(spec, T)
    return TruncSeries(T, _compose_trunc(f.coeffs, frob, T, spec))


def phi_unapply(h, spec, T):
    """Solve phi(g) = h to degree T.

    The preimage is supported in degrees <= T//q, where phi(g) mod X^(T+1)
    determines g completely; the remaining degrees of h are consistency
    checks and any mismatch raises NotInImageError.
    """
    p, q = spec.p, spec.q
    bound = T // q
    hc = h.coeffs
    g = _zeros(T, spec)
    if hc:
        g[0] = hc[0]  # phi fixes constants
    for n in range(1, T + 1):
        s = fe_zero(spec)
        for m in range(1, min(n, bound) + 1):
            if fe_is_zero(g[m]):
                continue
            c = _frob_power_coeff(m, n, p, q)
            if c != 0:
                s = fe_add(s, fe_scale(g[m], c, spec), spec)
        have = hc[n] if n < len(hc) else fe_zero(spec)
        if n <= bound:
            g[n] = fe_scale(fe_sub(have, s, spec), mpq(1, mpq(p) ** n), spec)
        elif have != s:
            raise NotInImageError(
                f"coefficient mismatch at degree {n}: series is not phi of a "
                f"series of degree <= {bound}"
            )
    return TruncSeries(T, g)
