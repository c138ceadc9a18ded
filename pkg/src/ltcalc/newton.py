"""Closed-form Newton polygon vertices (x_m, y_m) and torsion counts.

x_m = q^m / p^(k_m + 1) with k_m = floor((m-1)/e) counts the pi^m-torsion
points fixed by the character, and y_m is the valuation at that vertex.
Everything is an exact rational; y_m is computed by three routes (defining
sum, closed form, telescoping from y_0) which must agree.
"""

from __future__ import annotations

from dataclasses import dataclass

from gmpy2 import mpq

from .extension import (
    ConsistencyError,
    make_extension,
    order_of_one,
    residue_group_structure,
)


@dataclass(frozen=True)
class NewtonVertex:
    m: int
    x: object  # exact rational
    y: object


def _k(m, e):
    return (m - 1) // e


def _x(spec, m):
    return mpq(spec.q) ** m / mpq(spec.p) ** (_k(m, spec.e) + 1)


def _y0(spec):
    return mpq(spec.e, spec.p - 1) - mpq(1, spec.q - 1)


def _y_definition(spec, m):
    p, q, e = spec.p, spec.q, spec.e
    total = mpq(e, p - 1)
    for j in range(1, m):
        total -= mpq(1, p ** (_k(j, e) + 1))
    total -= mpq(q, p ** (_k(m, e) + 1) * (q - 1))
    return total


def _y_closed(spec, m):
    # m = e n + r with 1 <= r <= e
    p, q, e = spec.p, spec.q, spec.e
    n, r = divmod(m - 1, e)
    r += 1
    return (
        mpq(e, p**n * (p - 1))
        - mpq(r, p ** (n + 1))
        - mpq(1, (q - 1) * p ** (n + 1))
    )


def _y_telescoping(spec, m):
    q = spec.q
    total = _y0(spec)
    prev_x = _x(spec, 0)
    for j in range(1, m + 1):
        xj = _x(spec, j)
        total -= (xj - prev_x) / (mpq(q) ** (j - 1) * (q - 1))
        prev_x = xj
    return total


def xm_ym(spec, m):
    """The m-th Newton vertex; raises if the three y-routes disagree."""
    if m < 0:
        raise ValueError("m must be >= 0")
    if m == 0:
        return NewtonVertex(0, mpq(1), _y0(spec))
    y = _y_definition(spec, m)
    closed = _y_closed(spec, m)
    tele = _y_telescoping(spec, m)
    if y != closed or y != tele:
        raise ConsistencyError(
            f"y_{m} routes disagree: definition {y}, closed {closed}, "
            f"telescoping {tele}"
        )
    return NewtonVertex(m, _x(spec, m), y)


def newton_slope(spec, m):
    """Slope of the polygon segment ending at vertex m (0 at m = 0)."""
    if m == 0:
        return mpq(0)
    return mpq(1, mpq(spec.q) ** (m - 1) * (spec.q - 1))


def newton_vertices(spec, max_m):
    return [xm_ym(spec, m) for m in range(max_m + 1)]


def qp2_valuation(p, k):
    """1/(p^(k-1)(q-1)) with q = p^2; cross-checked against the vertex y_k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    q = p * p
    val = mpq(1, p ** (k - 1) * (q - 1))
    spec = make_extension(p, 2, "unramified")
    vertex = xm_ym(spec, k)
    if vertex.y != val:
        raise ConsistencyError(f"qp2 valuation {val} differs from y_{k} = {vertex.y}")
    if vertex.x != mpq(p) ** k:
        raise ConsistencyError(f"x_{k} is not p^{k} in the unramified quadratic case")
    return val


def torsion_fixed_count(spec, m):
    """Number of pi^m-torsion points with kappa_z(1) = 1: q^m / (order of 1)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    order = order_of_one(spec, m)
    count, rem = divmod(spec.q**m, order)
    if rem:
        raise ConsistencyError(f"order of 1 does not divide q^{m}")
    x = _x(spec, m)
    if x != count:
        raise ConsistencyError(f"x_{m} = {x} does not match q^m/order = {count}")
    group = 1
    for t in residue_group_structure(spec, m):
        group *= t
    if group != spec.q**m or group % order:
        raise ConsistencyError("group order route disagrees")
    return count
