"""Integer-valued polynomials on o_L: pi-orderings, Lagrange bases, membership.

A pi-ordering of o_L is a sequence alpha_0, alpha_1, ... where each alpha_k
minimises v_pi(prod_{i<k}(alpha_k - alpha_i)) over all of o_L; the minimal
valuations equal w_q(k) no matter which minimisers are picked.  The greedy
construction here scans a complete transversal of o_L / pi^precision and
certifies itself by comparing every achieved valuation with the closed form,
which turns the finite sample into a proof that the ordering is genuine: a
sampled product can never beat the true infimum, so hitting w_q(k) at each
step means nothing outside the transversal could have done better.

Points live in the full ring of integers.  For the unramified family that is
strictly larger than the rational coefficient model used elsewhere in the
package (a transversal must reach all q residues of o_L / pi, not just the p
of them visible over Q_p), so this module carries its own power-basis model
Z[x]/(g): g = x^d - p for the ramified family (x is the uniformiser) and a
monic lift of the lexicographically first irreducible polynomial over F_p for
the unramified one.  Elements are coordinate tuples of rationals; ramified
coordinates coincide with the package FieldElem representation, and for d = 1
both families collapse to Z_p.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from gmpy2 import mpq
from sympy import Poly, symbols

from .extension import INFINITE, ConsistencyError, _vp
from .spancheck import _wq_int


# ---------------------------------------------------------------------------
# power-basis model of o_L

@dataclass(frozen=True)
class _Model:
    p: int
    deg: int
    e: int
    minpoly: tuple  # monic, low to high, integer coefficients
    redrows: tuple  # x^(deg+j) reduced mod minpoly, j = 0..deg-2


def _min_poly_unram(p, d):
    """Monic degree-d polynomial irreducible over F_p, first in lex order of
    its low-to-high coefficient vector."""
    x = symbols("x")
    for tail in itertools.product(range(p), repeat=d):
        cands = [1] + [tail[d - 1 - j] for j in range(d)]
        if Poly(cands, x, modulus=p).is_irreducible:
            return tuple(tail) + (1,)
    raise AssertionError("no irreducible polynomial found")  # unreachable


def _model_for(spec):
    p, d = spec.p, spec.d
    if d == 1:
        return _Model(p=p, deg=1, e=spec.e, minpoly=(), redrows=())
    if spec.kind == "ramified":
        minpoly = (-p,) + (0,) * (d - 1) + (1,)
    else:
        minpoly = _min_poly_unram(p, d)
    rows = []
    row = tuple(mpq(-c) for c in minpoly[:d])
    for _ in range(d - 1):
        rows.append(row)
        # multiply by x, fold the overflow with the first row
        top = row[d - 1]
        row = tuple(
            (mpq(0) if k == 0 else row[k - 1]) + top * rows[0][k] for k in range(d)
        )
    return _Model(p=p, deg=d, e=spec.e, minpoly=minpoly, redrows=tuple(rows))


def _m_zero(model):
    return (mpq(0),) * model.deg


def _m_one(model):
    return (mpq(1),) + (mpq(0),) * (model.deg - 1)


def _m_add(x, y, model):
    return tuple(a + b for a, b in zip(x, y))


def _m_sub(x, y, model):
    return tuple(a - b for a, b in zip(x, y))


def _m_mul(x, y, model):
    deg = model.deg
    if deg == 1:
        return (x[0] * y[0],)
    conv = [mpq(0)] * (2 * deg - 1)
    for i, a in enumerate(x):
        if a:
            for j, b in enumerate(y):
                if b:
                    conv[i + j] += a * b
    for k in range(2 * deg - 2, deg - 1, -1):
        c = conv[k]
        if c:
            for j, r in enumerate(model.redrows[k - deg]):
                if r:
                    conv[j] += c * r
    return tuple(conv[:deg])


def _m_inv(x, model):
    """Inverse in Q[x]/(minpoly), by solving (mult-by-x) v = e_0."""
    deg = model.deg
    if all(a == 0 for a in x):
        raise ZeroDivisionError("inverse of zero element")
    if deg == 1:
        return (1 / x[0],)
    mat = [[mpq(0)] * deg for _ in range(deg)]
    col = x
    gen = (mpq(0), mpq(1)) + (mpq(0),) * (deg - 2)
    for j in range(deg):
        for i in range(deg):
            mat[i][j] = col[i]
        if j + 1 < deg:
            col = _m_mul(col, gen, model)
    rhs = [mpq(1)] + [mpq(0)] * (deg - 1)
    for c in range(deg):
        piv = next(r for r in range(c, deg) if mat[r][c] != 0)
        mat[c], mat[piv] = mat[piv], mat[c]
        rhs[c], rhs[piv] = rhs[piv], rhs[c]
        inv = 1 / mat[c][c]
        mat[c] = [v * inv for v in mat[c]]
        rhs[c] *= inv
        for r in range(deg):
            if r != c and mat[r][c]:
                f = mat[r][c]
                mat[r] = [v - f * w for v, w in zip(mat[r], mat[c])]
                rhs[r] -= f * rhs[c]
    return tuple(rhs)


def _m_val(x, model):
    """v_pi over the model: min(deg*v_p(c_k) + k) ramified, min v_p(c_k)
    unramified; INFINITE for zero."""
    best = None
    for k, c in enumerate(x):
        if c:
            v = _vp(c, model.p)
            if model.e > 1:
                v = model.deg * v + k
            if best is None or v < best:
                best = v
    return INFINITE if best is None else best


def _m_eval(coeffs, x, model):
    acc = _m_zero(model)
    for c in reversed(coeffs):
        acc = _m_add(_m_mul(acc, x, model), c, model)
    return acc


def _m_from_fe(c, spec, model):
    """Package FieldElem -> model coordinates.  Ramified coordinates carry
    over verbatim; the rational unramified model embeds diagonally."""
    if spec.kind == "ramified":
        return tuple(mpq(a) for a in c)
    return (mpq(c[0]),) + (mpq(0),) * (model.deg - 1)


def _pt_elem(pt, model):
    return tuple(mpq(c) for c in pt)


# ---------------------------------------------------------------------------
# greedy construction over a transversal

@dataclass(frozen=True)
class PiOrdering:
    """Certified pi-ordering: points are coordinate tuples over the model
    power basis, canonical representatives mod pi^precision, and
    achieved_vals[k] = v_pi(prod_{i<k}(alpha_k - alpha_i)) = w_q(k)."""

    spec: object
    model: _Model
    points: tuple
    precision: int
    achieved_vals: tuple
    tie_break: str


def _transversal(spec, precision):
    """Coordinate columns of a complete transversal of o_L / pi^precision,
    enumerated in lex order of the coordinate vectors (first coordinate most
    significant), plus the per-coordinate modulus exponents."""
    p, d = spec.p, spec.d
    if spec.kind == "ramified":
        # coordinate of pi^i matters mod p^ceil((precision-i)/d)
        exps = [max(0, -(-(precision - i) // d)) for i in range(d)]
    else:
        exps = [precision] * d
    grids = np.meshgrid(
        *[np.arange(p**m, dtype=np.int64) for m in exps], indexing="ij"
    )
    return [g.reshape(-1) for g in grids], exps


def _vp_lut(bound, p, big):
    """vals[x + bound - 1] = v_p(|x|) for |x| < bound, with v_p(0) = big."""
    vals = np.abs(np.arange(-(bound - 1), bound, dtype=np.int64))
    out = np.zeros(vals.shape, dtype=np.int64)
    work = np.where(vals == 0, 1, vals)
    while True:
        m = work % p == 0
        if not m.any():
            break
        out[m] += 1
        work[m] //= p
    out[vals == 0] = big
    return out


def build_pi_ordering(spec, count, precision=None, tie_break="low"):
    """Greedy pi-ordering of count points over a transversal of
    o_L / pi^precision.

    Each step picks the point minimising the accumulated valuation of the
    difference product; ties go to the lex-smallest coordinate vector
    ("high" picks the lex-largest, giving an independently built ordering).
    The default precision is the smallest with e*precision > w_q(count) + e.
    Raises ConsistencyError if any achieved valuation misses w_q(k), which
    would mean the transversal was too coarse.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if tie_break not in ("low", "high"):
        raise ValueError(f"tie_break must be 'low' or 'high', got {tie_break!r}")
    q, e = spec.q, spec.e
    need = _wq_int(count, q)
    if precision is None:
        precision = (need + e) // e + 1
    if e * precision <= need:
        raise ValueError(
            f"precision {precision} too small: e*precision must exceed "
            f"w_q(count) = {need}, so precision >= {need // e + 1}"
        )
    model = _model_for(spec)
    coords, exps = _transversal(spec, precision)
    d = spec.d
    big = 1 << 40  # beats any real valuation even summed over all steps
    luts = [_vp_lut(spec.p**m, spec.p, big) for m in exps]
    offs = [spec.p**m - 1 for m in exps]

    size = coords[0].shape[0]
    acc = np.zeros(size, dtype=np.int64)
    pts = []
    achieved = []
    for k in range(count):
        if tie_break == "high":
            idx = size - 1 - int(np.argmin(acc[::-1]))
        else:
            idx = int(np.argmin(acc))
        got = int(acc[idx])
        want = _wq_int(k, q)
        if got != want:
            raise ConsistencyError(
                f"greedy step {k} achieved valuation {got}, expected w_q({k}) "
                f"= {want} (precision {precision})"
            )
        pts.append(tuple(int(c[idx]) for c in coords))
        achieved.append(got)
        if k + 1 == count:
            break
        vmin = None
        for i in range(d):
            delta = coords[i] - coords[i][idx]
            vp = luts[i][delta + offs[i]]
            term = d * vp + i if e > 1 else vp
            vmin = term if vmin is None else np.minimum(vmin, term)
        acc += vmin
    return PiOrdering(
        spec=spec,
        model=model,
        points=tuple(pts),
        precision=precision,
        achieved_vals=tuple(achieved),
        tie_break=tie_break,
    )


# ---------------------------------------------------------------------------
# Lagrange basis and membership

def lagrange_basis(ordering, n):
    """f_0, ..., f_n with f_k = prod_{i<k}(X - alpha_i) / prod_{i<k}(alpha_k
    - alpha_i).

    Coefficients are model coordinate tuples, low degree first; f_0 = 1 and
    the leading coefficient of f_k has v_pi = -w_q(k).
    """
    if len(ordering.points) < n + 1:
        raise ValueError(
            f"ordering has {len(ordering.points)} points, need {n + 1}"
        )
    model = ordering.model
    pts = [_pt_elem(pt, model) for pt in ordering.points[: n + 1]]
    basis = []
    monic = [_m_one(model)]  # prod_{i<k}(X - alpha_i), low to high
    for k in range(n + 1):
        if k == 0:
            basis.append([_m_one(model)])
        else:
            dk = _m_eval(monic, pts[k], model)
            inv = _m_inv(dk, model)
            basis.append([_m_mul(c, inv, model) for c in monic])
        shifted = [_m_zero(model)] + monic
        scaled = [_m_mul(c, pts[k], model) for c in monic] + [_m_zero(model)]
        monic = [_m_sub(a, b, model) for a, b in zip(shifted, scaled)]
    return basis


def _membership_model(gm, ordering):
    """Triangular solve for g given by model coefficients (low to high)."""
    model = ordering.model
    m = len(gm) - 1
    if len(ordering.points) <= m:
        raise ValueError(
            f"ordering has {len(ordering.points)} points, need {m + 1}"
        )
    pts = [_pt_elem(pt, model) for pt in ordering.points[: m + 1]]
    npts = m + 1
    gv = [_m_eval(gm, x, model) for x in pts]
    # fvals[k][t] = f_k(alpha_t); zero below the diagonal, one on it
    fvals = [[None] * npts for _ in range(npts)]
    nv = [_m_one(model)] * npts  # prod_{i<k}(alpha_t - alpha_i) at k = 0
    for k in range(npts):
        if k == 0:
            for t in range(npts):
                fvals[0][t] = _m_one(model)
        else:
            inv = _m_inv(nv[k], model)
            for t in range(k, npts):
                fvals[k][t] = _m_mul(nv[t], inv, model)
        if k + 1 < npts:
            nv = [
                _m_mul(nv[t], _m_sub(pts[t], pts[k], model), model)
                for t in range(npts)
            ]
    lams = []
    for t in range(npts):
        acc = gv[t]
        for k in range(t):
            if any(lams[k]):
                acc = _m_sub(acc, _m_mul(lams[k], fvals[k][t], model), model)
        lams.append(acc)
    member = all(_m_val(lam, model) >= 0 for lam in lams)
    return lams, member


def int_membership(spec, g, ordering):
    """Expand g in the ordering's Lagrange basis and test integrality.

    g is a polynomial over the package coefficient field, low degree first.
    Returns (lambdas, member): lambda_t = g(alpha_t) - sum_{k<t} lambda_k
    f_k(alpha_t) as model coordinate tuples, and member is True iff every
    lambda has v_pi >= 0.  The verdict is exact because the ordering is
    certified.
    """
    model = ordering.model
    gm = [_m_from_fe(c, spec, model) for c in g]
    return _membership_model(gm, ordering)
