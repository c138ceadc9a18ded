"""Command-line front end: CSV dumps of the exact pipelines plus a
cross-module self-check suite.

Exit codes: 0 on success, 2 on validation errors (bad flags or infeasible
parameters), 3 on internal-consistency failures (any dual-route or
certificate check tripping).  All CSV output is byte-deterministic for a
given configuration, including across --threads settings.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from contextlib import contextmanager
from math import comb

from gmpy2 import mpq

from . import pnmatrix
from .extension import (
    ConsistencyError,
    fe_deserialize,
    fe_from_int,
    fe_is_zero,
    fe_mul,
    fe_one,
    fe_pi_pow,
    fe_serialize,
    fe_sub,
    fe_valuation,
    fe_zero,
    make_extension,
    residue_group_structure,
)
from .fieldpoly import p_equal, p_eval, p_trim
from .intpoly import _m_val, build_pi_ordering, int_membership, lagrange_basis
from .ltseries import NotInImageError, TruncSeries, _compose_trunc, exp_lt, log_lt, phi_apply
from .newton import newton_slope, torsion_fixed_count, xm_ym
from .pnmatrix import pn_poly, r_matrix, sigma_eval
from .psiq import psi_col_oracle, psi_int_test, psi_q_poly
from .spancheck import ImpossibleValuationError, RankError, run_span_check, tau_matrix, w_q

_KINDS = {"ram": "ramified", "unram": "unramified"}


def _make_spec(args):
    return make_extension(args.p, args.d, _KINDS[args.kind])


@contextmanager
def _out_stream(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _csv_writer(fh):
    return csv.writer(fh, lineterminator="\n")


def _poly_cell(f, spec):
    """One-cell polynomial encoding: space-joined "degree:coeff" with the
    FieldElem serialization, nonzero coefficients only."""
    parts = []
    for k, c in enumerate(f):
        if not fe_is_zero(c):
            parts.append(f"{k}:{fe_serialize(c, spec)}")
    return " ".join(parts)


def _read_poly(path, spec):
    """Read a sparse "degree,coeff" CSV (header row optional) into a dense
    coefficient list."""
    entries = {}
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip() == "degree":
                continue
            if len(row) != 2:
                raise ValueError(f"bad polynomial row {row!r}: want degree,coeff")
            k = int(row[0])
            if k < 0:
                raise ValueError(f"negative degree {k}")
            entries[k] = fe_deserialize(row[1].strip(), spec)
    if not entries:
        return []
    out = [fe_zero(spec)] * (max(entries) + 1)
    for k, c in entries.items():
        out[k] = c
    return p_trim(out)


# ---------------------------------------------------------------------------
# subcommands

def _cmd_span_check(args):
    spec = _make_spec(args)
    window = spec.d if args.window is None else args.window
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    threads = args.threads if args.threads else (os.cpu_count() or 1)
    sink = []
    report = run_span_check(
        spec, args.max_n, window=window, threads=threads, timing_sink=sink
    )
    with _out_stream(args.out) as fh:
        w = _csv_writer(fh)
        w.writerow(["n", "a", "b", "wq", "s0", "cap", "status", "best_val"])
        for r in report.rows:
            w.writerow(
                [
                    r.n,
                    r.a,
                    r.b,
                    r.wq,
                    "" if r.s0 is None else r.s0,
                    "" if r.cap is None else r.cap,
                    r.status,
                    r.best_val,
                ]
            )
    for phase, name, sec in sink:
        print(f"{phase},{name},{sec:.2f}", file=sys.stderr)
    return 0


def _cmd_pn(args):
    spec = _make_spec(args)
    with _out_stream(args.out) as fh:
        w = _csv_writer(fh)
        w.writerow(["n", "degree", "coeff"])
        for n in range(args.max_deg + 1):
            for k, c in enumerate(pn_poly(spec, n)):
                if not fe_is_zero(c):
                    w.writerow([n, k, fe_serialize(c, spec)])
    return 0


def _cmd_matrices(args):
    spec = _make_spec(args)
    R = r_matrix(spec, args.a, args.size)
    with _out_stream(args.out) as fh:
        w = _csv_writer(fh)
        w.writerow(["i", "j", "coeff"])
        for j in range(args.size):
            for i in range(j + 1):
                entry = R.get(i, j)
                if entry is not None and not fe_is_zero(entry):
                    w.writerow([i, j, fe_serialize(entry, spec)])
    return 0


def _cmd_psi(args):
    spec = _make_spec(args)
    with _out_stream(args.out) as fh:
        w = _csv_writer(fh)
        w.writerow(["k", "result_poly"])
        for k in range(args.max_k + 1):
            f = [fe_zero(spec)] * k + [fe_one(spec)]
            w.writerow([k, _poly_cell(psi_q_poly(spec, f), spec)])
    return 0


def _cmd_psi_int(args):
    spec = _make_spec(args)
    f = _read_poly(args.coeffs, spec)
    trace = psi_int_test(spec, f)
    with _out_stream(args.out) as fh:
        for k, v in enumerate(trace.min_vals):
            print(f"iterate {k}: min_val {v}", file=fh)
        print(f"verdict: {trace.verdict}", file=fh)
    return 0


def _cmd_newton(args):
    spec = _make_spec(args)
    with _out_stream(args.out) as fh:
        w = _csv_writer(fh)
        w.writerow(["m", "x_num", "x_den", "y_num", "y_den", "slope_num", "slope_den"])
        for m in range(args.max_m + 1):
            v = xm_ym(spec, m)
            s = newton_slope(spec, m)
            w.writerow(
                [
                    m,
                    v.x.numerator,
                    v.x.denominator,
                    v.y.numerator,
                    v.y.denominator,
                    s.numerator,
                    s.denominator,
                ]
            )
    return 0


def _cmd_pi_ordering(args):
    spec = _make_spec(args)
    o = build_pi_ordering(
        spec, args.count, precision=args.precision, tie_break=args.tie_break
    )
    with _out_stream(args.out) as fh:
        w = _csv_writer(fh)
        w.writerow(["k", "point", "achieved_val"])
        for k, (pt, val) in enumerate(zip(o.points, o.achieved_vals)):
            w.writerow([k, ";".join(str(c) for c in pt), val])
    return 0


def _cmd_int_check(args):
    spec = _make_spec(args)
    g = _read_poly(args.coeffs, spec)
    count = max(len(g), 1)
    o = build_pi_ordering(spec, count, precision=args.precision)
    lams, member = int_membership(spec, g, o)
    with _out_stream(args.out) as fh:
        for k, lam in enumerate(lams):
            ser = ";".join(f"{c.numerator}/{c.denominator}" for c in lam)
            print(f"lambda_{k}: {ser}", file=fh)
        print(f"verdict: {'member' if member else 'non-member'}", file=fh)
    return 0


# ---------------------------------------------------------------------------
# selfcheck: every cross-oracle invariant at small fixed sizes

def _chk_digit_weight_routes(spec):
    # w_q carries its own closed-form vs geometric-sum cross-check
    for n in range(240):
        w_q(spec, n)


def _chk_residue_groups(spec):
    for m in range(1, 5):
        residue_group_structure(spec, m)
        torsion_fixed_count(spec, m)


def _chk_exp_log_roundtrip(spec):
    T = 8
    want = [fe_zero(spec)] * (T + 1)
    want[1] = fe_one(spec)
    for coord in ("ST", "COL"):
        comp = _compose_trunc(
            exp_lt(spec, coord, T).coeffs, log_lt(spec, coord, T).coeffs, T, spec
        )
        if not p_equal(p_trim(comp), p_trim(want)):
            raise ConsistencyError(f"exp(log) != id in {coord} coordinate")


def _chk_phi_psi_section(spec):
    for k in (1, 2, 5):
        f = [fe_zero(spec)] * k + [fe_one(spec)]
        T = k * spec.q
        coeffs = f + [fe_zero(spec)] * (T + 1 - len(f))
        ph = phi_apply(TruncSeries(T, coeffs), spec, T)
        if not p_equal(psi_q_poly(spec, p_trim(ph.coeffs)), f):
            raise ConsistencyError(f"psi_q(phi(X^{k})) != X^{k}")


def _chk_psi_dual_route(spec):
    # full agreement of the two routes is normalized to q = p^2; on the
    # image of phi both compute the section at any spec
    for k in (1, 2):
        f = [fe_zero(spec)] * k + [fe_one(spec)]
        T0 = k * spec.q
        coeffs = f + [fe_zero(spec)] * (T0 + 1 - len(f))
        ph = p_trim(phi_apply(TruncSeries(T0, coeffs), spec, T0).coeffs)
        if not p_equal(psi_col_oracle(spec, ph, spec.q * T0), f):
            raise ConsistencyError(f"oracle section fails on phi(X^{k})")
    if spec.q != spec.p**2:
        return
    for k in (1, 2, 3, 7):
        f = [fe_zero(spec)] * k + [fe_one(spec)]
        if not p_equal(psi_q_poly(spec, f), psi_col_oracle(spec, f, k * spec.q)):
            raise ConsistencyError(f"psi_q routes disagree on X^{k}")


def _chk_pn_dual_route(spec):
    # pn_via_series raises internally on any mismatch with pn_poly
    pnmatrix.pn_via_series(spec, 8, 8)


def _chk_r_integrality(spec):
    q = spec.q
    S = 8
    for a in (0, 1):
        R = r_matrix(spec, a, S)
        for j in range(S):
            for i in range(j + 1):
                ibar = a + i * (q - 1)
                entry = R.get(i, j, fe_zero(spec))
                shifted = fe_mul(fe_pi_pow(j - i, spec), entry, spec)
                if fe_valuation(shifted, spec) < 0:
                    raise ConsistencyError(
                        f"pi^{j - i} r^({a})_({i},{j}) is not integral"
                    )
                delta = fe_sub(shifted, fe_from_int(comb(ibar, j - i), spec), spec)
                if fe_valuation(delta, spec) < q - 1:
                    raise ConsistencyError(
                        f"r^({a})_({i},{j}) misses the binomial congruence"
                    )


def _chk_sigma_tau_reindex(spec):
    q = spec.q
    S = 4
    for a in (0, 1):
        tau = tau_matrix(spec, a, S)
        T = a + (S - 1) * (q - 1)
        for yv in (1, 2):
            ya = fe_from_int(yv**a, spec)
            yq = fe_from_int(yv ** (q - 1), spec)
            for j in range(S):
                for i in range(j + 1):
                    got = fe_mul(p_eval(tau.get(i, j), yq, spec), ya, spec)
                    want = sigma_eval(spec, a + i * (q - 1), a + j * (q - 1), yv, T)
                    if got != want:
                        raise ConsistencyError(
                            f"sigma/tau reindex fails at a={a} i={i} j={j} y={yv}"
                        )


def _chk_span_engines_agree(spec):
    N = 4 * (spec.q - 1)
    fast = run_span_check(spec, N, engine="fast")
    ref = run_span_check(spec, N, engine="reference")
    if fast.rows != ref.rows:
        raise ConsistencyError(f"span engines disagree at N={N}")


def _chk_newton_routes(spec):
    # xm_ym raises when the three y-routes disagree; add the slope identity
    prev = xm_ym(spec, 0)
    for m in range(1, 7):
        v = xm_ym(spec, m)
        if prev.y - v.y != newton_slope(spec, m) * (v.x - prev.x):
            raise ConsistencyError(f"slope identity fails at m={m}")
        prev = v


def _chk_pi_ordering_certificate(spec):
    o = build_pi_ordering(spec, 8)
    for k, f in enumerate(lagrange_basis(o, 5)):
        if _m_val(f[-1], o.model) != -w_q(spec, k):
            raise ConsistencyError(f"Lagrange lead valuation misses -w_q({k})")
    g = [fe_zero(spec)] * 3 + [fe_one(spec)]
    _, member = int_membership(spec, g, o)
    if not member:
        raise ConsistencyError("Y^3 rejected from Int")


_CHECKS = [
    ("digit-weight-routes", _chk_digit_weight_routes),
    ("residue-group-structure", _chk_residue_groups),
    ("exp-log-roundtrip", _chk_exp_log_roundtrip),
    ("phi-psi-section", _chk_phi_psi_section),
    ("psi-dual-route", _chk_psi_dual_route),
    ("pn-dual-route", _chk_pn_dual_route),
    ("r-integrality-congruence", _chk_r_integrality),
    ("sigma-tau-reindex", _chk_sigma_tau_reindex),
    ("span-engines-agree", _chk_span_engines_agree),
    ("newton-vertex-routes", _chk_newton_routes),
    ("pi-ordering-certificate", _chk_pi_ordering_certificate),
]


def _cmd_selfcheck(args):
    spec = _make_spec(args)
    failures = []
    for name, fn in _CHECKS:
        t0 = time.perf_counter()
        try:
            fn(spec)
        except Exception as exc:
            failures.append(name)
            print(f"FAIL {name}: {exc}")
        else:
            print(f"pass {name}")
        print(f"selfcheck,{name},{time.perf_counter() - t0:.2f}", file=sys.stderr)
    if failures:
        print(f"selfcheck: first failure: {failures[0]}", file=sys.stderr)
        return 3
    return 0


# ---------------------------------------------------------------------------
# argument wiring

def _add_spec_args(sub, p=3, d=2, kind="ram"):
    sub.add_argument("--p", type=int, default=p, help="rational prime")
    sub.add_argument("--d", type=int, default=d, help="extension degree")
    sub.add_argument("--kind", choices=sorted(_KINDS), default=kind)


def build_parser():
    ap = argparse.ArgumentParser(
        prog="ltcalc",
        description="Exact computations over small p-adic fields: series, "
        "moment matrices, span reports, and integer-valued polynomials.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("span-check", help="stagewise span report as CSV")
    _add_spec_args(s)
    s.add_argument("--max-n", type=int, required=True)
    s.add_argument("--window", type=int, default=None, help="column-drop window (default d)")
    s.add_argument("--threads", type=int, default=1, help="worker count (0 = auto)")
    s.add_argument("--out", default="-")
    s.set_defaults(func=_cmd_span_check)

    s = sub.add_parser("pn", help="divided-power basis polynomials as CSV")
    _add_spec_args(s)
    s.add_argument("--max-deg", type=int, required=True)
    s.add_argument("--out", default="-")
    s.set_defaults(func=_cmd_pn)

    s = sub.add_parser("matrices", help="moment matrix r^(a) as CSV")
    _add_spec_args(s)
    s.add_argument("--a", type=int, required=True)
    s.add_argument("--size", type=int, required=True)
    s.add_argument("--out", default="-")
    s.set_defaults(func=_cmd_matrices)

    s = sub.add_parser("psi", help="psi_q on monomials as CSV")
    _add_spec_args(s)
    s.add_argument("--max-k", type=int, required=True)
    s.add_argument("--out", default="-")
    s.set_defaults(func=_cmd_psi)

    s = sub.add_parser("psi-int", help="psi_q-integrality verdict for a polynomial")
    _add_spec_args(s)
    s.add_argument("--coeffs", required=True, help="CSV file of degree,coeff rows")
    s.add_argument("--out", default="-")
    s.set_defaults(func=_cmd_psi_int)

    s = sub.add_parser("newton", help="Newton vertex data as CSV")
    _add_spec_args(s)
    s.add_argument("--max-m", type=int, required=True)
    s.add_argument("--out", default="-")
    s.set_defaults(func=_cmd_newton)

    s = sub.add_parser("pi-ordering", help="certified greedy pi-ordering as CSV")
    _add_spec_args(s)
    s.add_argument("--count", type=int, required=True)
    s.add_argument("--precision", type=int, default=None)
    s.add_argument("--tie-break", choices=["low", "high"], default="low")
    s.add_argument("--out", default="-")
    s.set_defaults(func=_cmd_pi_ordering)

    s = sub.add_parser("int-check", help="Int-membership of a polynomial")
    _add_spec_args(s)
    s.add_argument("--coeffs", required=True, help="CSV file of degree,coeff rows")
    s.add_argument("--precision", type=int, default=None)
    s.add_argument("--out", default="-")
    s.set_defaults(func=_cmd_int_check)

    s = sub.add_parser("selfcheck", help="run all cross-module invariants")
    _add_spec_args(s)
    s.set_defaults(func=_cmd_selfcheck)

    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, TypeError, OSError) as exc:
        print(f"ltcalc: {exc}", file=sys.stderr)
        return 2
    except (ConsistencyError, ImpossibleValuationError, RankError, NotInImageError) as exc:
        print(f"ltcalc: consistency failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
