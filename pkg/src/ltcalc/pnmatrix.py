"""The polynomials P_n and the moment matrices D, E, r built from them.

P_n is defined by exp(Y log(Z)) = sum_n P_n(Y) Z^n in the ST coordinate,
where exp is the classical exponential.  Two independent routes compute it:
a multinomial sum (pn_poly) and the series expansion (pn_via_series).  The
production route for the matrices is the derivative recursion; the oracles
stay around as cross-checks.

D_{i,j} = i! [Y^i] P_j.  E is the inverse change of basis: Y^j = sum_i
E_{i,j} P_i(Y).  r^{(a)}_{i,j} = D_{a+i(q-1), a+j(q-1)} is the restriction
of D to a residue class of the grading.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from gmpy2 import mpq

from .extension import (
    ConsistencyError,
    fe_add,
    fe_is_zero,
    fe_mul,
    fe_one,
    fe_pi_pow,
    fe_scale,
    fe_sub,
    fe_zero,
)
from .fieldpoly import p_coeff, p_trim
from .ltseries import ST, _log_tuple, _mul_trunc, mult_by

# selfcheck support: when set, applied to every r_matrix entry before return
_r_entry_hook = None

_FACT = [1]


def _fact(n):
    while len(_FACT) <= n:
        _FACT.append(_FACT[-1] * len(_FACT))
    return _FACT[n]


@dataclass
class UTMatrix:
    """Upper-triangular matrix as a sparse entry map keyed by (i, j)."""

    size: int
    entries: dict = field(default_factory=dict)

    def get(self, i, j, default=None):
        return self.entries.get((i, j), default)


# ---------------------------------------------------------------------------
# the polynomials P_n

def pn_poly(spec, n):
    """P_n(Y) as a multinomial sum over vectors k with sum k_l q^l = n.

    The exponent of pi is sum l*k_l; the index l is unbounded (every l with
    q^l <= n contributes, regardless of the field degree).
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    q = spec.q
    powers = [1]
    while powers[-1] * q <= n:
        powers.append(powers[-1] * q)
    coeffs = [fe_zero(spec)] * (n + 1)

    def walk(level, remaining, ydeg, pideg, denom):
        if level == 0:
            # k_0 = remaining
            c = fe_scale(
                fe_pi_pow(-pideg, spec), mpq(1, denom * _fact(remaining)), spec
            )
            coeffs[ydeg + remaining] = fe_add(coeffs[ydeg + remaining], c, spec)
            return
        step = powers[level]
        k = 0
        while k * step <= remaining:
            walk(
                level - 1,
                remaining - k * step,
                ydeg + k,
                pideg + level * k,
                denom * _fact(k),
            )
            k += 1

    walk(len(powers) - 1, n, 0, 0, 1)
    return p_trim(coeffs)


def pn_via_series(spec, N, T):
    """P_0..P_N read off from exp(Y log(Z)), then checked against pn_poly.

    The Z^n coefficient of exp(Y log Z) is sum_k [Z^n](log Z)^k Y^k / k!.
    """
    if T < N:
        raise ValueError("T must be >= N")
    L = list(_log_tuple(spec, ST, T))
    out = []
    # lpows[k] = (log Z)^k truncated at T; minimal degree is k
    lpow = [fe_one(spec)] + [fe_zero(spec)] * T
    cols = [[lpow[n] for n in range(N + 1)]]
    for k in range(1, N + 1):
        lpow = _mul_trunc(lpow, L, T, spec)
        cols.append([lpow[n] for n in range(N + 1)])
    for n in range(N + 1):
        poly = [
            fe_scale(cols[k][n], mpq(1, _fact(k)), spec) for k in range(n + 1)
        ]
        poly = p_trim(poly)
        if poly != pn_poly(spec, n):
            raise ConsistencyError(f"series and multinomial routes differ at P_{n}")
        out.append(poly)
    return out


# ---------------------------------------------------------------------------
# the matrices

@lru_cache(maxsize=16)
def _d_entries(spec, N):
    """Nonzero D_{i,j} for 0 <= i <= j < N, by the derivative recursion."""
    q = spec.q
    entries = {}
    one = fe_one(spec)
    entries[(0, 0)] = one
    # precompute pi^{-r} for the few q-powers in range
    pipows = []
    step = 1
    r = 0
    while step < N:
        pipows.append((step, fe_pi_pow(-r, spec)))
        step *= q
        r += 1
    prev = {0: one}  # row 0: delta_{0,j}
    for i in range(1, N):
        row = {}
        # D_{i,j} nonzero only for j >= i with j = i mod (q-1)
        for j in range(i, N, q - 1 if q > 2 else 1):
            acc = None
            for qr, pw in pipows:
                if qr > j:
                    break
                prior = prev.get(j - qr)
                if prior is not None:
                    term = fe_mul(pw, prior, spec)
                    acc = term if acc is None else fe_add(acc, term, spec)
            if acc is not None and not fe_is_zero(acc):
                row[j] = acc
                entries[(i, j)] = acc
        prev = row
    return entries


def d_matrix(spec, N):
    """D_{i,j} = i! [Y^i] P_j for 0 <= i <= j < N, with a spot check on P_j."""
    if N < 1:
        raise ValueError("N must be >= 1")
    entries = dict(_d_entries(spec, N))
    for j in range(min(N, 9)):
        pj = pn_poly(spec, j)
        for i in range(j + 1):
            want = fe_scale(p_coeff(pj, i, spec), _fact(i), spec)
            got = entries.get((i, j), fe_zero(spec))
            if want != got:
                raise ConsistencyError(f"D_({i},{j}) disagrees with pn_poly")
    return UTMatrix(N, entries)


@lru_cache(maxsize=16)
def _e_entries(spec, N):
    """Nonzero E_{i,j} (coordinates of Y^j in the P-basis), 0 <= i <= j < N.

    Column recursion from the derivative identity for P:
    E_{i,j} = j E_{i-1,j-1} - sum_{k>=1} pi^{-k} E_{i-1+q^k, j}, E_{j,j} = j!.
    """
    q = spec.q
    pipows = []
    step = q
    r = 1
    while step < N:
        pipows.append((step, fe_pi_pow(-r, spec)))
        step *= q
        r += 1
    entries = {(0, 0): fe_one(spec)}
    for j in range(1, N):
        entries[(j, j)] = fe_scale(fe_one(spec), _fact(j), spec)
        for i in range(j - 1, 0, -1):
            if (j - i) % (q - 1):
                continue
            acc = fe_zero(spec)
            prior = entries.get((i - 1, j - 1))
            if prior is not None:
                acc = fe_scale(prior, j, spec)
            for qk, pw in pipows:
                high = entries.get((i - 1 + qk, j))
                if high is not None:
                    acc = fe_sub(acc, fe_mul(pw, high, spec), spec)
            if not fe_is_zero(acc):
                entries[(i, j)] = acc
    return entries


def e_matrix(spec, N):
    """Inverse of the P-coefficient matrix: Y^j = sum_i E_{i,j} P_i(Y)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    entries = dict(_e_entries(spec, N))
    # spot check: sum_k [Y^i]P_k * E_{k,j} = delta_{i,j} on a small block
    m = min(N, 8)
    pcols = [pn_poly(spec, k) for k in range(m)]
    for j in range(m):
        for i in range(j + 1):
            acc = fe_zero(spec)
            for k in range(i, j + 1):
                e = entries.get((k, j))
                if e is not None and k < len(pcols):
                    acc = fe_add(acc, fe_mul(p_coeff(pcols[k], i, spec), e, spec), spec)
            want = fe_one(spec) if i == j else fe_zero(spec)
            if acc != want:
                raise ConsistencyError(f"E column {j} fails M*E = I at row {i}")
    return UTMatrix(N, entries)


def r_matrix(spec, a, S):
    """r^{(a)}_{i,j} = D_{a+i(q-1), a+j(q-1)} for 0 <= i <= j < S."""
    q = spec.q
    if not 0 <= a <= q - 2:
        raise ValueError(f"a must be a residue 0..{q - 2}, got {a}")
    if S < 1:
        raise ValueError("S must be >= 1")
    N = a + (S - 1) * (q - 1) + 1
    dd = _d_entries(spec, N)
    entries = {}
    hook = _r_entry_hook
    for j in range(S):
        jbar = a + j * (q - 1)
        for i in range(j + 1):
            ibar = a + i * (q - 1)
            v = dd.get((ibar, jbar))
            if v is None:
                continue
            if hook is not None:
                v = hook(i, j, v)
            if not fe_is_zero(v):
                entries[(i, j)] = v
    return UTMatrix(S, entries)


# ---------------------------------------------------------------------------
# sigma values

_SIGMA_POWS = {}


def _a_series_powers(spec, a, T, imax):
    key = (spec, a, T)
    pows = _SIGMA_POWS.get(key)
    if pows is None:
        base = mult_by(spec, ST, a, T).coeffs
        pows = [[fe_one(spec)] + [fe_zero(spec)] * T, base]
        _SIGMA_POWS[key] = pows
    while len(pows) <= imax:
        pows.append(_mul_trunc(pows[-1], pows[1], T, spec))
    return pows


def sigma_eval(spec, i, j, a, T):
    """sigma_{i,j}(a): the Z^j-coefficient of [a](Z)^i in the ST coordinate."""
    if not 0 <= i <= j <= T:
        raise ValueError("need 0 <= i <= j <= T")
    if not isinstance(a, int):
        raise TypeError("a must be an integer")
    pows = _a_series_powers(spec, a, T, i)
    return pows[i][j]
