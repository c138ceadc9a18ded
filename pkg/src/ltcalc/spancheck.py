"""Stagewise span computation for the tau matrices over the valuation ring.

For each residue a mod q-1, stage s adjoins the polynomials tau_{i,s} to the
module spanned so far and re-eliminates, tracking for every degree b the
valuation of the leading coefficient of the reduced basis element g_b.  The
target is -w_q(a + b(q-1)); the stage where it is first reached is s0, and
Cap(n) = a + (q-1) s0(n).

Two engines produce the same report: a literal one that assembles the
(2s+1) x (s+1) matrix in the documented row order and eliminates it over
exact field elements, and a fast one (spanfast) that works at a per-stage
scale in o_L / pi^(w+1), which is exact for everything the report contains.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .extension import (
    ConsistencyError,
    fe_div,
    fe_is_zero,
    fe_mul,
    fe_sub,
    fe_valuation,
    fe_zero,
)
from .fieldpoly import p_coeff, p_scale, p_sub, p_trim
from .pnmatrix import UTMatrix, r_matrix


class RankError(Exception):
    """The rows do not have full column rank over L."""


class ImpossibleValuationError(Exception):
    """A leading valuation fell below the -w_q floor; the run is corrupt."""


# ---------------------------------------------------------------------------
# digit sums

def _sq_int(n, q):
    total = 0
    while n:
        n, r = divmod(n, q)
        total += r
    return total


def _wq_int(n, q):
    return (n - _sq_int(n, q)) // (q - 1)


def s_q(spec, n):
    """Base-q digit sum."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return _sq_int(n, spec.q)


def w_q(spec, n):
    """(n - s_q(n))/(q-1), cross-checked against sum of floor(n/q^k)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    q = spec.q
    direct = (n - _sq_int(n, q)) // (q - 1)
    total = 0
    step = q
    while step <= n:
        total += n // step
        step *= q
    if direct != total:
        raise ConsistencyError(f"w_q routes disagree at n={n}: {direct} vs {total}")
    return direct


# ---------------------------------------------------------------------------
# tau matrices

def tau_matrix(spec, a, S):
    """tau^{(a)} solved column by column from r tau = D_Y r.

    No inverse is formed: with r unitriangular, column j satisfies
    tau_{i,j} = Y^i r_{i,j} - sum_{k>i} r_{i,k} tau_{k,j}.
    """
    R = r_matrix(spec, a, S)
    z = fe_zero(spec)
    entries = {}
    for j in range(S):
        for i in range(j, -1, -1):
            rij = R.get(i, j, z)
            poly = [z] * i + [rij] if not fe_is_zero(rij) else []
            for k in range(i + 1, j + 1):
                rik = R.get(i, k)
                if rik is None:
                    continue
                tk = entries.get((k, j))
                if tk:
                    poly = p_sub(poly, p_scale(tk, rik, spec), spec)
            entries[(i, j)] = p_trim(poly)
    return UTMatrix(S, entries)


# ---------------------------------------------------------------------------
# elimination over the valuation ring

def _pick_pivot(cands, spec, tie_break):
    # cands: (original_index, row, col_entry) in ascending index order;
    # minimal valuation wins, ties go to the lowest original index unless
    # reversed for the elimination-safety check
    best_idx = best_row = best_v = None
    for idx, row, entry in cands:
        v = fe_valuation(entry, spec)
        if best_v is None or v < best_v:
            best_idx, best_row, best_v = idx, row, v
        elif v == best_v and tie_break == "high":
            best_idx, best_row = idx, row
    return (best_idx, best_row), best_v


def dvr_eliminate(rows, spec, tie_break="low"):
    """Eliminate to an upper-triangular row list using only o_L row operations.

    Pivots take minimal valuation within each column; every update subtracts
    an o_L-multiple of the pivot row, so the o_L-row-span is preserved.
    Requires full column rank.
    """
    if not rows:
        return []
    ncols = len(rows[0])
    live = [(idx, list(r)) for idx, r in enumerate(rows)]
    out = []
    for c in range(ncols):
        cands = [(idx, r, r[c]) for idx, r in live if not fe_is_zero(r[c])]
        if not cands:
            raise RankError(f"no pivot available in column {c}")
        (pidx, pivot), pv = _pick_pivot(cands, spec, tie_break)
        live = [(idx, r) for idx, r in live if idx != pidx]
        for idx, r in live:
            if fe_is_zero(r[c]):
                continue
            m = fe_div(r[c], pivot[c], spec)
            for t in range(c, ncols):
                if not fe_is_zero(pivot[t]):
                    r[t] = fe_sub(r[t], fe_mul(m, pivot[t], spec), spec)
        out.append(pivot)
    return out


@dataclass
class GaussState:
    a: int
    s: int
    basis: list  # per b <= s: PolyL g_b (entries below frozen no longer tracked)
    lead_vals: list
    frozen: int
    hits: list


def _row_from_poly(poly, s, frozen, spec):
    z = fe_zero(spec)
    return [p_coeff(poly, s - c, spec) if s - c >= frozen else z for c in range(s + 1 - frozen)]


def span_step(state, tau_col, spec, window=None, tie_break="low"):
    """Advance one stage: assemble B in the documented row order and re-read
    the basis off the eliminated matrix."""
    q = spec.q
    s = state.s + 1
    if len(tau_col) != s + 1:
        raise ValueError(f"stage {s} needs tau_{{i,{s}}} for i = 0..{s}")
    if window is None:
        window = spec.d
    frozen = state.frozen
    rows = [_row_from_poly(tau_col[s], s, frozen, spec)]
    for b in range(s - 1, frozen - 1, -1):
        rows.append(_row_from_poly(state.basis[b], s, frozen, spec))
    for i in range(s):
        rows.append(_row_from_poly(tau_col[i], s, frozen, spec))
    tri = dvr_eliminate(rows, spec, tie_break)
    basis = list(state.basis)
    basis.append(None)
    lead_vals = list(state.lead_vals)
    lead_vals.append(None)
    hits = list(state.hits)
    hits.append(False)
    for c, row in enumerate(tri):
        b = s - c
        poly = [fe_zero(spec)] * frozen + [row[s - t] for t in range(frozen, b + 1)]
        basis[b] = p_trim(poly)
        v = fe_valuation(row[c], spec)
        floor = -_wq_int(state.a + b * (q - 1), q)
        if v < floor:
            raise ImpossibleValuationError(
                f"a={state.a} s={s} b={b}: leading valuation {v} below {floor}"
            )
        old = lead_vals[b]
        if old is not None and v > old:
            raise ConsistencyError(
                f"a={state.a} s={s} b={b}: leading valuation increased {old}->{v}"
            )
        lead_vals[b] = v
        hits[b] = v == floor
    while frozen + window <= s + 1 and all(
        hits[b] for b in range(frozen, frozen + window)
    ):
        frozen += window
    return GaussState(
        a=state.a, s=s, basis=basis, lead_vals=lead_vals, frozen=frozen, hits=hits
    )


# ---------------------------------------------------------------------------
# full runs

@dataclass(frozen=True)
class SpanRow:
    n: int
    a: int
    b: int
    wq: int
    s0: object  # stage index, or None while pending
    cap: object
    status: str
    best_val: int


@dataclass
class SpanReport:
    spec: object
    max_n: int
    window: int
    rows: list


def _run_class_reference(spec, a, S, window, tie_break):
    taus = tau_matrix(spec, a, S)
    state = GaussState(a=a, s=-1, basis=[], lead_vals=[], frozen=0, hits=[])
    first_hit = [None] * S
    for s in range(S):
        col = [taus.get(i, s, []) for i in range(s + 1)]
        state = span_step(state, col, spec, window=window, tie_break=tie_break)
        for b in range(s + 1):
            if first_hit[b] is None and state.hits[b]:
                first_hit[b] = s
    return first_hit, state.lead_vals


def run_span_check(
    spec,
    N,
    window=None,
    tie_break="low",
    engine="fast",
    threads=1,
    timing_sink=None,
):
    """Stage report for all n < N (requires (q-1) | N, N >= q-1)."""
    q = spec.q
    if N < q - 1 or N % (q - 1):
        raise ValueError(f"N must be a positive multiple of q-1 = {q - 1}")
    if window is None:
        window = spec.d
    S = N // (q - 1)

    if engine == "reference":
        runner = lambda a: _run_class_reference(spec, a, S, window, tie_break)
    elif engine == "fast":
        from .spanfast import run_class_fast

        runner = lambda a: run_class_fast(
            spec, a, S, window, tie_break, timing_sink=timing_sink
        )
    else:
        raise ValueError(f"unknown engine {engine!r}")

    classes = list(range(q - 1))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(runner, classes))
    else:
        results = [runner(a) for a in classes]

    rows = []
    for a, (first_hit, lead_vals) in zip(classes, results):
        for b in range(S):
            n = a + b * (q - 1)
            wq = _wq_int(n, q)
            s0 = first_hit[b]
            if s0 is not None:
                rows.append(
                    SpanRow(n, a, b, wq, s0, a + (q - 1) * s0, "exact", -wq)
                )
            else:
                rows.append(
                    SpanRow(n, a, b, wq, None, None, "pending", lead_vals[b])
                )
    rows.sort(key=lambda r: r.n)
    return SpanReport(spec=spec, max_n=N, window=window, rows=rows)
