"""Dense polynomials over field elements, index = degree.

A polynomial is a plain list of FieldElem with no trailing zeros; the zero
polynomial is the empty list and its degree is None.  The same layout doubles
as the coefficient vector of a truncated power series (where trailing zeros
are meaningful and kept by the series layer instead).
"""

from __future__ import annotations

from gmpy2 import mpq

from .extension import (
    INFINITE,
    fe_add,
    fe_is_zero,
    fe_mul,
    fe_neg,
    fe_scale,
    fe_sub,
    fe_valuation,
    fe_zero,
)


def p_trim(c):
    n = len(c)
    while n > 0 and fe_is_zero(c[n - 1]):
        n -= 1
    return c[:n]


def p_is_zero(c):
    return all(fe_is_zero(a) for a in c)


def p_degree(c):
    """Degree of the polynomial, None for the zero polynomial."""
    for i in range(len(c) - 1, -1, -1):
        if not fe_is_zero(c[i]):
            return i
    return None


def p_zero():
    return []


def p_monomial(k, coeff, spec):
    return [fe_zero(spec)] * k + [coeff]


def p_add(a, b, spec):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] = fe_add(out[i], c, spec)
    return p_trim(out)


def p_sub(a, b, spec):
    n = max(len(a), len(b))
    z = fe_zero(spec)
    out = []
    for i in range(n):
        x = a[i] if i < len(a) else z
        y = b[i] if i < len(b) else z
        out.append(fe_sub(x, y, spec))
    return p_trim(out)


def p_neg(a, spec):
    return [fe_neg(c, spec) for c in a]


def p_scale(a, s, spec):
    """Multiply by a FieldElem scalar."""
    if fe_is_zero(s):
        return []
    return p_trim([fe_mul(c, s, spec) for c in a])


def p_scale_q(a, r, spec):
    """Multiply by a plain rational."""
    r = mpq(r)
    if r == 0:
        return []
    return [fe_scale(c, r, spec) for c in a]


def p_mul(a, b, spec, trunc=None):
    """Product, optionally discarding degrees > trunc."""
    if not a or not b:
        return []
    n = len(a) + len(b) - 1
    if trunc is not None:
        n = min(n, trunc + 1)
    out = [fe_zero(spec)] * n
    for i, x in enumerate(a):
        if fe_is_zero(x):
            continue
        jmax = n - i
        for j, y in enumerate(b[:jmax]):
            if not fe_is_zero(y):
                out[i + j] = fe_add(out[i + j], fe_mul(x, y, spec), spec)
    return p_trim(out)


def p_shift(a, k, spec):
    if not a:
        return []
    return [fe_zero(spec)] * k + list(a)


def p_eval(a, x, spec):
    out = fe_zero(spec)
    for c in reversed(a):
        out = fe_add(fe_mul(out, x, spec), c, spec)
    return out


def p_deriv(a, spec):
    return p_trim([fe_scale(c, i, spec) for i, c in enumerate(a)][1:])


def p_equal(a, b):
    return p_trim(list(a)) == p_trim(list(b))


def p_coeff(a, k, spec):
    return a[k] if k < len(a) else fe_zero(spec)


def p_min_valuation(a, spec):
    """Minimum valuation over all coefficients; INFINITE for the zero poly."""
    best = INFINITE
    for c in a:
        v = fe_valuation(c, spec)
        if v < best:
            best = v
    return best
