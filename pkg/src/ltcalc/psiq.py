"""The trace operator psi_q on polynomials in the COL coordinate.

psi_q is (1/q) times the trace along phi: phi(psi_col(f))(X) = sum over the
q torsion points zeta of f(zeta (+) X), and psi_q = psi_col / q.  Two routes:

* psi_q_poly: the recurrence psi(X^k) = X psi(X^(k-q)) - p psi(X^(k+1-q))
  with the tabulated base cases (the (1-q)/p base case is the q = p^2 form;
  see psi_col_oracle for the arbiter);
* psi_col_oracle: the torsion points zeta (+) X are exactly the roots of
  T(Y) = Y^q + pY - (X^q + pX), so the trace is a Newton power sum of T and
  needs no expansion of the group law.  Dividing by q and inverting phi
  gives psi_q.
"""

from __future__ import annotations

from dataclasses import dataclass

from gmpy2 import mpq

from .extension import ConsistencyError, fe_from_mpq, fe_one, fe_zero
from .fieldpoly import (
    p_add,
    p_coeff,
    p_degree,
    p_equal,
    p_min_valuation,
    p_mul,
    p_scale,
    p_scale_q,
    p_sub,
    p_trim,
)
from .ltseries import NotInImageError, TruncSeries, phi_unapply

_PSI_MEMO = {}


def _psi_monomial(spec, k):
    """psi_q(X^k) as a polynomial, memoized per spec."""
    key = (spec, k)
    got = _PSI_MEMO.get(key)
    if got is not None:
        return got
    p, q = spec.p, spec.q
    if k == 0:
        out = [fe_one(spec)]
    elif k <= q - 2:
        out = []
    elif k == q - 1:
        out = [fe_from_mpq(mpq(1 - q, p), spec)]
    elif k == q:
        out = [fe_zero(spec), fe_one(spec)]
    else:
        # X^k = X^(k-q) (phi(X) - pX), then the projection formula
        left = [fe_zero(spec)] + list(_psi_monomial(spec, k - q))
        right = p_scale_q(_psi_monomial(spec, k - q + 1), p, spec)
        out = p_sub(left, right, spec)
    _PSI_MEMO[key] = out
    return out


def psi_q_poly(spec, f):
    """Linear extension of the psi_q recurrence to a polynomial in X."""
    out = []
    for k, c in enumerate(f):
        out = p_add(out, p_scale(_psi_monomial(spec, k), c, spec), spec)
    return out


def torsion_power_sums(spec, m_max):
    """Power sums of the roots of Y^q + pY - (X^q + pX), degrees 0..m_max.

    Specializing X = 0 recovers the power sums of the torsion points
    themselves: q at m = 0, (q-1)(-p)^k at m = (q-1)k, zero otherwise.
    """
    p, q = spec.p, spec.q
    one = fe_one(spec)
    c = [fe_zero(spec), fe_from_mpq(p, spec)] + [fe_zero(spec)] * (q - 2) + [one]
    sums = [[fe_from_mpq(q, spec)]]
    for m in range(1, m_max + 1):
        if m <= q - 2:
            sums.append([])
        elif m == q - 1:
            sums.append([fe_from_mpq(mpq(-(q - 1) * p), spec)])
        elif m == q:
            sums.append(p_scale_q(c, q, spec))
        else:
            term = p_mul(c, sums[m - q], spec)
            sums.append(p_sub(term, p_scale_q(sums[m - q + 1], p, spec), spec))
    return sums


def psi_col_oracle(spec, f, T):
    """psi_q(f) via the torsion trace: independent of the recurrence route."""
    deg = p_degree(f)
    if deg is None:
        return []
    if deg > T // spec.q:
        raise ValueError("need deg f <= T/q")
    sums = torsion_power_sums(spec, deg)
    total = []
    for m in range(deg + 1):
        total = p_add(total, p_scale(sums[m], p_coeff(f, m, spec), spec), spec)
    total = p_scale_q(total, mpq(1, spec.q), spec)
    padded = list(total) + [fe_zero(spec)] * (T + 1 - len(total))
    try:
        g = phi_unapply(TruncSeries(T, padded[: T + 1]), spec, T)
    except NotInImageError as exc:
        raise ConsistencyError(f"torsion trace is not in the image of phi: {exc}")
    return p_trim(g.coeffs)


@dataclass
class PsiTrace:
    iterates: list
    min_vals: list
    verdict: str


def psi_int_test(spec, f):
    """Iterate psi_q until the constant tail; report integrality per iterate."""
    iterates = [p_trim(list(f))]
    while True:
        cur = iterates[-1]
        deg = p_degree(cur)
        if deg is None or deg == 0:
            # constants are fixed points of psi_q
            if not p_equal(psi_q_poly(spec, cur), cur):
                raise ConsistencyError("psi_q does not fix the constant tail")
            break
        iterates.append(psi_q_poly(spec, cur))
    min_vals = [p_min_valuation(g, spec) for g in iterates]
    verdict = "integral"
    for k, v in enumerate(min_vals):
        if v < 0:
            verdict = f"fails-at-iterate-{k}"
            break
    return PsiTrace(iterates=iterates, min_vals=min_vals, verdict=verdict)
