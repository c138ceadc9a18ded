"""Newton polygon vertices, slopes, and torsion counts."""

import pytest
from gmpy2 import mpq

from ltcalc.extension import make_extension
from ltcalc.newton import (
    newton_slope,
    newton_vertices,
    qp2_valuation,
    torsion_fixed_count,
    xm_ym,
)

RAM32 = make_extension(3, 2, "ramified")
RAM23 = make_extension(2, 3, "ramified")
UNR22 = make_extension(2, 2, "unramified")
UNR32 = make_extension(3, 2, "unramified")

SPECS = [RAM32, RAM23, UNR22, UNR32]


@pytest.mark.parametrize("spec", SPECS)
def test_vertex_zero(spec):
    v = xm_ym(spec, 0)
    assert v.x == 1
    assert v.y == mpq(spec.e, spec.p - 1) - mpq(1, spec.q - 1)


@pytest.mark.parametrize("spec", SPECS)
def test_vertex_one(spec):
    assert xm_ym(spec, 1).x == mpq(spec.q, spec.p)


def test_y1_quadratic_unramified():
    # 1/2 - 1/3 - 1/24 = 1/8
    assert xm_ym(UNR32, 1).y == mpq(1, 8)
    assert xm_ym(UNR32, 2).y == mpq(1, 24)


@pytest.mark.parametrize("spec", SPECS)
def test_x_values_are_positive_integers(spec):
    for v in newton_vertices(spec, 25):
        assert v.x == int(v.x)
        assert v.x >= 1


@pytest.mark.parametrize("spec", SPECS)
def test_y_positive_and_decreasing(spec):
    # strict decrease needs q > p; the degenerate q = p family repeats
    # vertices pairwise (same x, same y), so only monotonicity holds there
    vs = newton_vertices(spec, 60)
    for v in vs:
        assert v.y > 0
    for a, b in zip(vs[1:], vs[2:]):
        if spec.q > spec.p:
            assert b.y < a.y
        else:
            assert b.y <= a.y
            assert (b.y < a.y) == (b.x > a.x)


@pytest.mark.parametrize("spec", SPECS)
def test_y_tends_to_zero(spec):
    vs = newton_vertices(spec, 60)
    m0 = next(v.m for v in vs if v.y < mpq(1, 1000))
    assert all(v.y < mpq(1, 1000) for v in vs[m0:])


@pytest.mark.parametrize("spec", SPECS)
def test_slopes(spec):
    vs = newton_vertices(spec, 20)
    for m in range(1, 21):
        dx = vs[m].x - vs[m - 1].x
        dy = vs[m - 1].y - vs[m].y
        want = newton_slope(spec, m)
        assert dy == want * dx
        if spec.q > spec.p:
            assert dx > 0
            assert dy / dx == want


def test_x_strictly_increasing_when_q_exceeds_p():
    for spec in (UNR22, UNR32):
        vs = newton_vertices(spec, 20)
        for a, b in zip(vs, vs[1:]):
            assert b.x > a.x


def test_degenerate_ramified_vertices_kept():
    # q = p makes x_0 = x_1 = 1; emitted as-is
    vs = newton_vertices(RAM32, 3)
    assert vs[0].x == vs[1].x == 1


def test_qp2_valuation_frozen_values():
    assert qp2_valuation(3, 1) == mpq(1, 8)
    assert qp2_valuation(3, 2) == mpq(1, 24)
    assert qp2_valuation(2, 1) == mpq(1, 3)
    assert qp2_valuation(2, 3) == mpq(1, 12)


def test_unramified_display_identity():
    # e = 1: y_n = (q/p - 1) / ((q-1) p^(n-1) (p-1)), checked to n = 10
    for spec in (UNR22, UNR32):
        p, q = spec.p, spec.q
        for n in range(1, 11):
            want = (mpq(q, p) - 1) / (mpq(q - 1) * p ** (n - 1) * (p - 1))
            assert xm_ym(spec, n).y == want


@pytest.mark.parametrize(
    "spec,m,want",
    [
        (UNR32, 1, 3),
        (RAM32, 2, 3),
        (UNR22, 1, 2),
        (RAM23, 4, 4),
    ],
)
def test_torsion_fixed_count_examples(spec, m, want):
    assert torsion_fixed_count(spec, m) == want


@pytest.mark.parametrize("spec", SPECS)
def test_torsion_count_matches_vertex(spec):
    for m in range(1, 7):
        assert torsion_fixed_count(spec, m) == xm_ym(spec, m).x
