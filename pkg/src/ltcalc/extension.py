"""Exact elements of the coefficient field L and its valuation ring.

Two families of fields are supported, both with residue characteristic p:

* ramified of degree d: the rational model is Q[x]/(x^d - p) with pi = x,
  so e = d, f = 1, q = p;
* unramified of degree d: the rational model is Q itself with pi = p, so
  e = 1, f = d, q = p^d.  Elements outside Q are never needed by the series
  and matrix layers, whose coefficients are all rational in this family.

A field element is a tuple of `field_degree` rationals (gmpy2.mpq), the
coordinate of pi^i at index i.  The valuation is normalized so v(pi) = 1.
"""

from __future__ import annotations

from dataclasses import dataclass

from gmpy2 import mpq, mpz, remove

INFINITE = float("inf")

# a field element is a plain tuple of mpq, length spec.field_degree
FieldElem = tuple


class ConsistencyError(Exception):
    """Two independent computations of the same quantity disagreed."""


def _is_prime(n):
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    k = 3
    while k * k <= n:
        if n % k == 0:
            return False
        k += 2
    return True


@dataclass(frozen=True)
class ExtensionSpec:
    p: int
    d: int
    kind: str
    e: int
    f: int
    q: int
    field_degree: int


def make_extension(p, d, kind):
    """Build the spec for a degree-d ramified or unramified extension of Q_p."""
    if not _is_prime(p):
        raise ValueError(f"p must be prime, got {p}")
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if kind == "ramified":
        return ExtensionSpec(p=p, d=d, kind=kind, e=d, f=1, q=p, field_degree=d)
    if kind == "unramified":
        return ExtensionSpec(p=p, d=d, kind=kind, e=1, f=d, q=p**d, field_degree=1)
    raise ValueError(f"kind must be 'ramified' or 'unramified', got {kind!r}")


# ---------------------------------------------------------------------------
# element construction

def fe_zero(spec):
    return (mpq(0),) * spec.field_degree


def fe_one(spec):
    return (mpq(1),) + (mpq(0),) * (spec.field_degree - 1)


def fe_from_int(n, spec):
    return (mpq(n),) + (mpq(0),) * (spec.field_degree - 1)


def fe_from_mpq(r, spec):
    return (mpq(r),) + (mpq(0),) * (spec.field_degree - 1)


def fe_pi_pow(k, spec):
    """pi^k as a field element, any integer k (negative powers divide by p)."""
    u, r = divmod(k, spec.field_degree)
    out = [mpq(0)] * spec.field_degree
    # pi^field_degree = p in the ramified model; pi = p when field_degree = 1
    if spec.field_degree == 1:
        out[0] = mpq(spec.p) ** k if k >= 0 else mpq(1, spec.p) ** (-k)
    else:
        out[r] = mpq(spec.p) ** u if u >= 0 else mpq(1, spec.p) ** (-u)
    return tuple(out)


# ---------------------------------------------------------------------------
# arithmetic (spec argument last, matching the call sites in the series code)

def fe_add(x, y, spec):
    return tuple(a + b for a, b in zip(x, y))


def fe_sub(x, y, spec):
    return tuple(a - b for a, b in zip(x, y))


def fe_neg(x, spec):
    return tuple(-a for a in x)


def fe_scale(x, r, spec):
    """Multiply by a plain rational."""
    r = mpq(r)
    return tuple(a * r for a in x)


def fe_mul(x, y, spec):
    d = spec.field_degree
    if d == 1:
        return (x[0] * y[0],)
    p = spec.p
    out = [mpq(0)] * d
    for i, a in enumerate(x):
        if a == 0:
            continue
        for j, b in enumerate(y):
            if b == 0:
                continue
            k = i + j
            if k < d:
                out[k] += a * b
            else:
                out[k - d] += a * b * p  # pi^d = p
    return tuple(out)


def fe_inv(x, spec):
    """Inverse in Q[pi]/(pi^d - p), by solving (mult-by-x) v = e_0."""
    d = spec.field_degree
    if d == 1:
        if x[0] == 0:
            raise ZeroDivisionError("inverse of zero field element")
        return (1 / x[0],)
    if all(a == 0 for a in x):
        raise ZeroDivisionError("inverse of zero field element")
    p = spec.p
    # column j of m is x * pi^j reduced mod pi^d - p
    m = [[mpq(0)] * d for _ in range(d)]
    for j in range(d):
        for i, a in enumerate(x):
            k = i + j
            if k < d:
                m[k][j] += a
            else:
                m[k - d][j] += a * p
    rhs = [mpq(1)] + [mpq(0)] * (d - 1)
    # exact Gaussian elimination, partial pivot on nonzero
    cols = list(range(d))
    for c in range(d):
        piv = next(r for r in range(c, d) if m[r][c] != 0)
        m[c], m[piv] = m[piv], m[c]
        rhs[c], rhs[piv] = rhs[piv], rhs[c]
        inv = 1 / m[c][c]
        m[c] = [v * inv for v in m[c]]
        rhs[c] *= inv
        for r in range(d):
            if r != c and m[r][c] != 0:
                t = m[r][c]
                m[r] = [v - t * w for v, w in zip(m[r], m[c])]
                rhs[r] -= t * rhs[c]
    return tuple(rhs)


def fe_div(x, y, spec):
    return fe_mul(x, fe_inv(y, spec), spec)


def fe_pow(x, n, spec):
    if n < 0:
        return fe_pow(fe_inv(x, spec), -n, spec)
    out = fe_one(spec)
    base = x
    while n:
        if n & 1:
            out = fe_mul(out, base, spec)
        base = fe_mul(base, base, spec) if n > 1 else base
        n >>= 1
    return out


def fe_is_zero(x):
    return all(a == 0 for a in x)


def _vp(r, p):
    """p-adic valuation of a nonzero rational."""
    num = mpz(r.numerator)
    den = mpz(r.denominator)
    if num == 0:
        raise ValueError("vp of zero")
    _, vn = remove(num, p)
    if den == 1:
        return vn
    _, vd = remove(den, p)
    return vn - vd


def fe_valuation(x, spec):
    """v_pi(sum c_i pi^i) = min over nonzero c_i of e*v_p(c_i) + i; v(0) = INFINITE."""
    e = spec.e
    p = spec.p
    best = None
    for i, c in enumerate(x):
        if c == 0:
            continue
        v = e * _vp(c, p) + i
        if best is None or v < best:
            best = v
    return INFINITE if best is None else int(best)


# ---------------------------------------------------------------------------
# serialization: semicolon-joined "num/den", lowest terms, den > 0

def fe_serialize(x, spec):
    return ";".join(f"{c.numerator}/{c.denominator}" for c in x)


def fe_deserialize(s, spec):
    parts = s.split(";")
    if len(parts) != spec.field_degree:
        raise ValueError(
            f"expected {spec.field_degree} coordinates, got {len(parts)} in {s!r}"
        )
    out = []
    for part in parts:
        num, _, den = part.partition("/")
        if not den:
            raise ValueError(f"coordinate {part!r} is not of the form num/den")
        out.append(mpq(int(num), int(den)))
    return tuple(out)


# ---------------------------------------------------------------------------
# structure of o_L / pi^m as an abelian group

def _residue_group_closed_form(spec, m):
    # write m = e*k + r with 1 <= r <= e: the group is
    # (Z/p^k)^(f*(e-r)) x (Z/p^(k+1))^(f*r)
    e, f, p = spec.e, spec.f, spec.p
    k = (m - 1) // e
    r = m - e * k
    factors = [p**k] * (f * (e - r)) + [p ** (k + 1)] * (f * r)
    return sorted(t for t in factors if t > 1)


def _residue_group_snf(spec, m):
    # relation lattice of o_L/pi^m in the integral basis, handed to a Smith
    # normal form routine without pre-sorting
    from sympy import Matrix
    from sympy.matrices.normalforms import smith_normal_form

    p, d = spec.p, spec.d
    if spec.kind == "unramified":
        rel = Matrix.eye(d) * p**m
    else:
        rel = Matrix.zeros(d, d)
        for t in range(d):
            u, v = divmod(m + t, d)
            rel[t, v] = p**u  # x^(m+t) = p^u x^v in Z[x]/(x^d - p)
    snf = smith_normal_form(rel)
    diag = [abs(int(snf[i, i])) for i in range(d)]
    return sorted(t for t in diag if t > 1)


def residue_group_structure(spec, m):
    """Invariant factors of o_L/pi^m, ascending, computed by two routes.

    The closed form follows from pi^e = p times a unit; the second route runs
    Smith normal form on the relation lattice.  Disagreement raises.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    if m == 0:
        return []
    closed = _residue_group_closed_form(spec, m)
    snf = _residue_group_snf(spec, m)
    if closed != snf:
        raise ConsistencyError(
            f"residue group mismatch at m={m}: closed form {closed}, SNF {snf}"
        )
    return closed


def order_of_one(spec, m):
    """Additive order of 1 in o_L/pi^m: the smallest p-power t with v(t) >= m."""
    if m <= 0:
        return 1
    k = (m - 1) // spec.e
    order = spec.p ** (k + 1)
    # independent check by valuation scan
    j = 0
    while fe_valuation(fe_from_int(spec.p**j, spec), spec) < m:
        j += 1
    if spec.p**j != order:
        raise ConsistencyError(
            f"order of 1 mismatch at m={m}: formula {order}, scan {spec.p ** j}"
        )
    return order
