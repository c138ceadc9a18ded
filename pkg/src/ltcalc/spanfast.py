"""Fast per-class engine for the span computation.

Works stage by stage like the literal path, but keeps every matrix entry as a
tuple of integer components modulo p^K instead of exact rationals.  At stage s
all module elements, rescaled by pi^W with W = w_q(a + s(q-1)), have integral
coefficients, and every valuation the report reads is at most W; choosing K
with e*K >= W + 1 therefore makes the arithmetic exact for the report, since
all truncation noise sits at valuation > W and every row update is still an
o_L-elementary operation on a generating set.

The generator rows come from the coefficient formula
    [Y^t] tau_{i,s} = E_{ibar, tbar} * D_{tbar, sbar} / tbar!
so the stage matrix is produced from two precomputed triangular tables and
never from polynomial arithmetic.  The basis is maintained incrementally:
each new row walks down from its leading slot, either claiming a slot,
swapping with a worse incumbent, or being reduced; ties keep the earlier
arrival, which reproduces the literal engine's lowest-row-index pivot rule.
"""

from __future__ import annotations

import time

from .extension import fe_mul, fe_pi_pow, fe_valuation
from .spancheck import ImpossibleValuationError, _wq_int


# ---------------------------------------------------------------------------
# component arithmetic: x = sum_k c_k pi^k with pi^fd = p (fd = 1 collapses
# to plain residues mod p^K)

def _umul(x, y, p, MOD, fd):
    if fd == 1:
        return [x[0] * y[0] % MOD]
    if fd == 2:
        a0, a1 = x
        b0, b1 = y
        return [(a0 * b0 + p * a1 * b1) % MOD, (a0 * b1 + a1 * b0) % MOD]
    out = [0] * fd
    for i, a in enumerate(x):
        if not a:
            continue
        for j, b in enumerate(y):
            k = i + j
            if k >= fd:
                out[k - fd] += a * b * p
            else:
                out[k] += a * b
    return [c % MOD for c in out]


def _unit_inv(x, p, MOD, fd):
    if fd == 1:
        return [pow(x[0], -1, MOD)]
    if fd == 2:
        a, b = x
        idet = pow(a * a - p * b * b, -1, MOD)
        return [a * idet % MOD, -b * idet % MOD]
    # small linear solve: columns are the components of x * pi^k
    cols = []
    col = list(x)
    for _ in range(fd):
        cols.append(col)
        col = [col[-1] * p % MOD] + col[:-1]
    mat = [[cols[k][j] for k in range(fd)] for j in range(fd)]
    rhs = [1] + [0] * (fd - 1)
    perm = list(range(fd))
    for c in range(fd):
        piv = next(r for r in range(c, fd) if mat[perm[r]][c] % p)
        perm[c], perm[piv] = perm[piv], perm[c]
        inv = pow(mat[perm[c]][c], -1, MOD)
        for r in range(fd):
            if r == c:
                continue
            f = mat[perm[r]][c] * inv % MOD
            if f:
                for t in range(c, fd):
                    mat[perm[r]][t] = (mat[perm[r]][t] - f * mat[perm[c]][t]) % MOD
                rhs[perm[r]] = (rhs[perm[r]] - f * rhs[perm[c]]) % MOD
    return [rhs[perm[c]] * pow(mat[perm[c]][c], -1, MOD) % MOD for c in range(fd)]


def _shift_up(x, r, p, fd):
    # multiply by pi^r (caller reduces mod MOD)
    h, r = divmod(r, fd)
    if h:
        ph = p**h
        x = [c * ph for c in x]
    for _ in range(r):
        x = [x[-1] * p] + x[:-1]
    return x


def _shift_down(x, r, p, fd):
    # exact division by pi^r; valid when the true valuation is >= r
    h, r = divmod(r, fd)
    if h:
        ph = p**h
        x = [c // ph for c in x]
    for _ in range(r):
        x = x[1:] + [x[0] // p]
    return x


def _comp_val(x, p, fd):
    best = None
    for k, c in enumerate(x):
        if c:
            v = 0
            while c % p == 0:
                c //= p
                v += 1
            v = fd * v + k
            if best is None or v < best:
                best = v
    return best


# ---------------------------------------------------------------------------
# scaled tables

def _fe_scaled(x, spec, MODtab):
    """FieldElem -> (pi-valuation, unit components mod MODtab)."""
    v = fe_valuation(x, spec)
    u = fe_mul(x, fe_pi_pow(-v, spec), spec)
    comps = []
    for c in u:
        num = int(c.numerator)
        den = int(c.denominator)
        comps.append(num % MODtab if den == 1 else num * pow(den, -1, MODtab) % MODtab)
    return v, comps


def _build_tables(spec, a, S, MODtab):
    """Per-class triangles Ehat[i][t-i] = E_{ibar,tbar} and
    Mhat[s][t] = D_{tbar,sbar}/tbar!, both as (val, unit) pairs."""
    from .pnmatrix import _d_entries, _e_entries

    q, p, e = spec.q, spec.p, spec.e
    N = a + (S - 1) * (q - 1) + 1
    dd = _d_entries(spec, N)
    ee = _e_entries(spec, N)

    # pi-valuations and unit inverses of tbar! (Legendre via incremental build)
    bars = [a + t * (q - 1) for t in range(S)]
    fvp = [0] * N
    funit = [1] * N
    vp = 0
    un = 1
    for n in range(1, N):
        m = n
        while m % p == 0:
            m //= p
            vp += 1
        un = un * m % MODtab
        fvp[n] = vp
        funit[n] = un
    finv = {b: pow(funit[b], -1, MODtab) for b in bars}

    Ehat = []
    for i in range(S):
        ib = bars[i]
        row = []
        for t in range(i, S):
            x = ee.get((ib, bars[t]))
            row.append(None if x is None else _fe_scaled(x, spec, MODtab))
        Ehat.append(row)
    Mhat = []
    for s in range(S):
        sb = bars[s]
        col = []
        for t in range(s + 1):
            tb = bars[t]
            x = dd.get((tb, sb))
            if x is None:
                col.append(None)
            else:
                v, u = _fe_scaled(x, spec, MODtab)
                col.append((v - e * fvp[tb], _umul(u, [finv[tb]] + [0] * (spec.field_degree - 1), p, MODtab, spec.field_degree)))
        Mhat.append(col)
    return Ehat, Mhat


# ---------------------------------------------------------------------------
# the stage loop, slot-list variant (mid-level oracle for the packed engine)

def run_class_slots(spec, a, S, window, tie_break, timing_sink=None):
    q, p, e, fd = spec.q, spec.p, spec.e, spec.field_degree
    tie_high = tie_break == "high"
    wqt = [_wq_int(a + b * (q - 1), q) for b in range(S)]
    Ktab = -(-(wqt[-1] + 1) // e)
    MODtab = p**Ktab

    t0 = time.perf_counter()
    Ehat, Mhat = _build_tables(spec, a, S, MODtab)
    if timing_sink is not None:
        timing_sink.append(("span-fast", f"a={a}-tables", time.perf_counter() - t0))

    t0 = time.perf_counter()
    basis = [None] * S  # per slot: [lo, comps, scaled lead val, cached lead inverse]
    vals = [None] * S
    first_hit = [None] * S
    frozen = 0
    W = 0
    for s in range(S):
        Wnew = wqt[s]
        K = -(-(Wnew + 1) // e)
        MOD = p**K
        eK = e * K
        if Wnew != W:
            delta = Wnew - W
            for b in range(frozen, s):
                g = basis[b]
                comps = g[1]
                lo = g[0]
                if fd == 1:
                    ph = p**delta
                    src = comps[0]
                    for k in range(lo, b + 1):
                        if src[k]:
                            src[k] *= ph
                else:
                    h, r = divmod(delta, fd)
                    ph = p**h
                    for k in range(lo, b + 1):
                        ent = [comps[c][k] for c in range(fd)]
                        if not any(ent):
                            continue
                        if h:
                            ent = [c * ph for c in ent]
                        for _ in range(r):
                            ent = [ent[-1] * p] + ent[:-1]
                        for c in range(fd):
                            comps[c][k] = ent[c]
                g[2] += delta
                g[3] = None  # modulus grew; cached inverse is stale
            W = Wnew

        mcol = Mhat[s]
        for i in ([s] + list(range(s))):
            lo = max(i, frozen)
            erow = Ehat[i]
            comps = [[0] * (s + 1) for _ in range(fd)]
            any_entry = False
            for t in range(lo, s + 1):
                ev = erow[t - i]
                if ev is None:
                    continue
                mv = mcol[t]
                if mv is None:
                    continue
                sval = ev[0] + mv[0] + W
                if sval >= eK:
                    continue
                u = _umul(ev[1], mv[1], p, MODtab, fd)
                ent = [c % MOD for c in _shift_up(u, sval, p, fd)]
                if any(ent):
                    for c in range(fd):
                        comps[c][t] = ent[c]
                    any_entry = True
            if not any_entry:
                continue
            # insertion walk
            t = s
            while True:
                while t >= frozen:
                    for c in range(fd):
                        if comps[c][t]:
                            break
                    else:
                        t -= 1
                        continue
                    break
                if t < frozen:
                    break  # row died: it lies in the span of the basis
                ent = [comps[c][t] for c in range(fd)]
                ev = _comp_val(ent, p, fd)
                g = basis[t]
                if g is None:
                    basis[t] = [lo, comps, ev, None]
                    break
                if ev < g[2] or (tie_high and ev == g[2]):
                    basis[t] = [lo, comps, ev, None]
                    lo, comps, ev, _ = g
                    ent = [comps[c][t] for c in range(fd)]
                    g = basis[t]
                gv = g[2]
                if g[3] is None:
                    glead = _shift_down([g[1][c][t] for c in range(fd)], gv, p, fd)
                    g[3] = _unit_inv([c % MOD for c in glead], p, MOD, fd)
                m = _umul(_shift_down(ent, gv, p, fd), g[3], p, MOD, fd)
                glo = g[0]
                gc = g[1]
                if fd == 1:
                    ma = m[0]
                    ra = comps[0]
                    ga = gc[0]
                    for k in range(glo, t):
                        v = ga[k]
                        if v:
                            ra[k] = (ra[k] - ma * v) % MOD
                    ra[t] = 0
                elif fd == 2:
                    ma, mb = m
                    pmb = p * mb
                    ra, rb = comps
                    ga, gb = gc
                    for k in range(glo, t):
                        va = ga[k]
                        vb = gb[k]
                        if va or vb:
                            ra[k] = (ra[k] - ma * va - pmb * vb) % MOD
                            rb[k] = (rb[k] - ma * vb - mb * va) % MOD
                    ra[t] = 0
                    rb[t] = 0
                else:
                    for k in range(glo, t):
                        gent = [gc[c][k] for c in range(fd)]
                        if any(gent):
                            red = _umul(m, gent, p, MOD, fd)
                            for c in range(fd):
                                comps[c][k] = (comps[c][k] - red[c]) % MOD
                    for c in range(fd):
                        comps[c][t] = 0
                if glo < lo:
                    lo = glo
                t -= 1

        # stage bookkeeping
        for b in range(frozen, s + 1):
            g = basis[b]
            if g is None:
                raise ImpossibleValuationError(
                    f"a={a} s={s}: no basis element of degree {b}"
                )
            v = g[2] - W
            floor = -wqt[b]
            if v < floor:
                raise ImpossibleValuationError(
                    f"a={a} s={s} b={b}: leading valuation {v} below {floor}"
                )
            old = vals[b]
            if old is not None and v > old:
                raise ImpossibleValuationError(
                    f"a={a} s={s} b={b}: leading valuation increased {old}->{v}"
                )
            vals[b] = v
            if v == floor and first_hit[b] is None:
                first_hit[b] = s
        while frozen + window <= s + 1 and all(
            first_hit[b] is not None for b in range(frozen, frozen + window)
        ):
            frozen += window
            for b in range(frozen, s + 1):
                g = basis[b]
                if g is not None and g[0] < frozen:
                    g[0] = frozen
    if timing_sink is not None:
        timing_sink.append(("span-fast", f"a={a}-stages", time.perf_counter() - t0))
    return first_hit, vals


# ---------------------------------------------------------------------------
# the stage loop, packed variant (production)
#
# Every row component is stored as one big integer: slot t of the row (the
# coefficient of Y^t) occupies bits [ (t-off)*BITS, (t-off+1)*BITS ).  A row
# reduction then costs a few GMP-sized multiplications instead of a Python
# loop over slots.  Subtraction is replaced by adding (p^K - m) * pivot,
# which keeps slots nonnegative at the price of per-slot junk that is 0 mod
# p^K; the junk is harmless (it sits in the truncation lattice) and is
# cleared by renormalising a row once, when it claims a basis slot.  A side
# bitmask per row tracks which slots may hold a nonzero residue; slots the
# walk has passed keep stale bits that the mask never exposes again, so no
# masking pass is needed after a reduction.

from gmpy2 import mpz, remove as _gmpy_remove


def _cv_mpz(ent, p, fd):
    best = None
    for k, c in enumerate(ent):
        if c:
            _, v = _gmpy_remove(c, p)
            v = fd * int(v) + k
            if best is None or v < best:
                best = v
    return best


def run_class_fast(spec, a, S, window, tie_break, timing_sink=None):
    q, p, e, fd = spec.q, spec.p, spec.e, spec.field_degree
    tie_high = tie_break == "high"
    wqt = [_wq_int(a + b * (q - 1), q) for b in range(S)]
    Kmax = -(-(wqt[-1] + 1) // e)
    MODtab = p**Kmax
    BITS = ((p**(2 * Kmax)).bit_length() + 64 + 7) // 8 * 8
    BYTES = BITS // 8
    SLOTMASK = mpz((1 << BITS) - 1)
    pz = mpz(p)
    POW = [1]
    for _ in range(e * Kmax + 1):
        POW.append(POW[-1] * p)

    t0 = time.perf_counter()
    Ehat, Mhat = _build_tables(spec, a, S, MODtab)
    if timing_sink is not None:
        timing_sink.append(("span-fast", f"a={a}-tables", time.perf_counter() - t0))

    t0 = time.perf_counter()
    # basis[t]: [off, mask, scaled lead val, cached lead inverse, packed
    # comps, lead-trimmed packed comps].  The trimmed copy drops the leading
    # slot; multiplying it by any scalar below MODK then stays strictly under
    # the lead-slot bit position, because canonical slots keep every per-slot
    # product inside its own field.  Reductions can therefore skip masking.
    basis = [None] * S
    vals = [None] * S
    first_hit = [None] * S
    frozen = 0
    W = 0
    for s in range(S):
        Wnew = wqt[s]
        K = -(-(Wnew + 1) // e)
        MODK = mpz(p**K)
        eK = e * K
        if Wnew != W:
            delta = Wnew - W
            h, rot = divmod(delta, fd)
            ph = mpz(p**h) if h else None
            for b in range(frozen, s):
                g = basis[b]
                pk = g[4]
                if ph is not None:
                    pk = [x * ph for x in pk]
                for _ in range(rot):
                    pk = [pk[-1] * pz] + pk[:-1]
                g[4] = pk
                g[2] += delta
                g[3] = None  # modulus grew; cached inverse is stale
                g[5] = None
            W = Wnew

        mcol = Mhat[s]
        for i in ([s] + list(range(s))):
            lo = max(i, frozen)
            erow = Ehat[i]
            bufs = [bytearray((s + 1 - lo) * BYTES) for _ in range(fd)]
            mask = 0
            for t in range(lo, s + 1):
                ev = erow[t - i]
                if ev is None:
                    continue
                mv = mcol[t]
                if mv is None:
                    continue
                sval = ev[0] + mv[0] + W
                if sval >= eK:
                    continue
                u = _umul(ev[1], mv[1], p, MODtab, fd)
                h2, r2 = divmod(sval, fd)
                if h2:
                    ph2 = POW[h2]
                    u = [c * ph2 for c in u]
                for _ in range(r2):
                    u = [u[-1] * p] + u[:-1]
                ent = [c % MODK for c in u]
                if any(ent):
                    mask |= 1 << t
                    pos = (t - lo) * BYTES
                    for c in range(fd):
                        bufs[c][pos : pos + BYTES] = int(ent[c]).to_bytes(
                            BYTES, "little"
                        )
            if not mask:
                continue
            off = lo
            packed = [mpz(int.from_bytes(bytes(b), "little")) for b in bufs]
            # insertion walk
            while True:
                if not mask:
                    break  # row died: it lies in the span of the basis
                t = mask.bit_length() - 1
                if t < frozen:
                    break
                idx = (t - off) * BITS
                if fd == 2:
                    ea = ((packed[0] >> idx) & SLOTMASK) % MODK
                    eb = ((packed[1] >> idx) & SLOTMASK) % MODK
                    if not ea and not eb:
                        mask &= ~(1 << t)
                        continue
                    if ea:
                        ev = 2 * int(_gmpy_remove(ea, p)[1])
                        if eb:
                            vb = 2 * int(_gmpy_remove(eb, p)[1]) + 1
                            if vb < ev:
                                ev = vb
                    else:
                        ev = 2 * int(_gmpy_remove(eb, p)[1]) + 1
                else:
                    ent = [((x >> idx) & SLOTMASK) % MODK for x in packed]
                    if not any(ent):
                        mask &= ~(1 << t)
                        continue
                    ev = _cv_mpz(ent, p, fd)
                g = basis[t]
                claim = g is None
                if not claim and (ev < g[2] or (tie_high and ev == g[2])):
                    claim = True
                if claim:
                    # renormalise: canonical residues stop value growth from
                    # compounding once this row starts acting as a pivot
                    width = t - off + 1
                    nmask = 0
                    nbufs = [bytearray(width * BYTES) for _ in range(fd)]
                    m2 = mask
                    while m2:
                        tt = m2.bit_length() - 1
                        m2 &= ~(1 << tt)
                        if tt < off or tt > t:
                            continue
                        jdx = (tt - off) * BITS
                        pos = (tt - off) * BYTES
                        nz = False
                        for c in range(fd):
                            r = ((packed[c] >> jdx) & SLOTMASK) % MODK
                            if r:
                                nz = True
                                nbufs[c][pos : pos + BYTES] = int(r).to_bytes(
                                    BYTES, "little"
                                )
                        if nz:
                            nmask |= 1 << tt
                    newrow = [
                        off,
                        nmask,
                        ev,
                        None,
                        [mpz(int.from_bytes(bytes(b), "little")) for b in nbufs],
                        None,
                    ]
                    if g is None:
                        basis[t] = newrow
                        break
                    basis[t] = newrow
                    off, mask, _, _, packed = g[:5]
                    idx = (t - off) * BITS
                    if fd == 2:
                        ea = ((packed[0] >> idx) & SLOTMASK) % MODK
                        eb = ((packed[1] >> idx) & SLOTMASK) % MODK
                    else:
                        ent = [((x >> idx) & SLOTMASK) % MODK for x in packed]
                    g = newrow
                gv = g[2]
                if g[3] is None:
                    gdx = (t - g[0]) * BITS
                    glead = _shift_down(
                        [((x >> gdx) & SLOTMASK) % MODK for x in g[4]], gv, p, fd
                    )
                    g[3] = _unit_inv([c % MODK for c in glead], p, MODK, fd)
                if fd == 2:
                    h2, r2 = divmod(gv, 2)
                    if h2:
                        ph2 = POW[h2]
                        sa = ea // ph2
                        sb = eb // ph2
                    else:
                        sa = ea
                        sb = eb
                    if r2:
                        sa, sb = sb, sa // p
                    i0, i1 = g[3]
                    m0 = (sa * i0 + p * (sb * i1)) % MODK
                    m1 = (sa * i1 + sb * i0) % MODK
                    m = (m0, m1)
                else:
                    m = _umul(_shift_down(ent, gv, p, fd), g[3], p, MODK, fd)
                goff = g[0]
                if goff < off:
                    sh = (off - goff) * BITS
                    packed = [x << sh for x in packed]
                    off = goff
                shift = (goff - off) * BITS
                gp = g[5]
                if gp is None:
                    gdx = (t - goff) * BITS
                    gp = [x - (((x >> gdx) & SLOTMASK) << gdx) for x in g[4]]
                    g[5] = gp
                if fd == 1:
                    ca = MODK - m[0]
                    packed[0] = packed[0] + ((ca * gp[0]) << shift)
                elif fd == 2:
                    ca = MODK - m[0]
                    cb = MODK - m[1]
                    ga, gb = gp
                    pa = ca * ga + pz * (cb * gb)
                    pb = ca * gb + cb * ga
                    packed[0] = packed[0] + (pa << shift)
                    packed[1] = packed[1] + (pb << shift)
                else:
                    cs = [MODK - c if c else None for c in m]
                    for cc in range(fd):
                        acc = 0
                        for ci, cval in enumerate(cs):
                            if cval is None:
                                continue
                            gi = cc - ci
                            if gi < 0:
                                gi += fd
                                acc += cval * gp[gi] * pz
                            else:
                                acc += cval * gp[gi]
                        packed[cc] = packed[cc] + (acc << shift)
                below = (1 << t) - 1
                mask = (mask | g[1]) & below

        # stage bookkeeping
        for b in range(frozen, s + 1):
            g = basis[b]
            if g is None:
                raise ImpossibleValuationError(
                    f"a={a} s={s}: no basis element of degree {b}"
                )
            v = g[2] - W
            floor = -wqt[b]
            if v < floor:
                raise ImpossibleValuationError(
                    f"a={a} s={s} b={b}: leading valuation {v} below {floor}"
                )
            old = vals[b]
            if old is not None and v > old:
                raise ImpossibleValuationError(
                    f"a={a} s={s} b={b}: leading valuation increased {old}->{v}"
                )
            vals[b] = v
            if v == floor and first_hit[b] is None:
                first_hit[b] = s
        while frozen + window <= s + 1 and all(
            first_hit[b] is not None for b in range(frozen, frozen + window)
        ):
            frozen += window
            for b in range(frozen, s + 1):
                g = basis[b]
                if g is not None and g[0] < frozen:
                    sh = (frozen - g[0]) * BITS
                    g[4] = [x >> sh for x in g[4]]
                    g[5] = None
                    g[0] = frozen
                    g[1] &= ~((1 << frozen) - 1)
    if timing_sink is not None:
        timing_sink.append(("span-fast", f"a={a}-stages", time.perf_counter() - t0))
    return first_hit, vals
