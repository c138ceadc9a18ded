"""Field element arithmetic, valuations, and residue ring structure."""

import pytest
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from ltcalc.extension import (
    ConsistencyError,
    INFINITE,
    fe_add,
    fe_deserialize,
    fe_div,
    fe_from_int,
    fe_from_mpq,
    fe_inv,
    fe_is_zero,
    fe_mul,
    fe_neg,
    fe_one,
    fe_pi_pow,
    fe_pow,
    fe_serialize,
    fe_sub,
    fe_valuation,
    fe_zero,
    make_extension,
    order_of_one,
    residue_group_structure,
)

RAM32 = make_extension(3, 2, "ramified")
RAM23 = make_extension(2, 3, "ramified")
UNR22 = make_extension(2, 2, "unramified")
UNR32 = make_extension(3, 2, "unramified")
UNR53 = make_extension(5, 3, "unramified")

SPECS = [RAM32, RAM23, UNR22, UNR32, UNR53]


def test_make_extension_derived_fields():
    assert (RAM32.e, RAM32.f, RAM32.q, RAM32.field_degree) == (2, 1, 3, 2)
    assert (RAM23.e, RAM23.f, RAM23.q, RAM23.field_degree) == (3, 1, 2, 3)
    assert (UNR22.e, UNR22.f, UNR22.q, UNR22.field_degree) == (1, 2, 4, 1)
    assert (UNR53.e, UNR53.f, UNR53.q, UNR53.field_degree) == (1, 3, 125, 1)


def test_make_extension_rejects_bad_input():
    with pytest.raises(ValueError):
        make_extension(4, 2, "ramified")
    with pytest.raises(ValueError):
        make_extension(3, 0, "ramified")
    with pytest.raises(ValueError):
        make_extension(3, 2, "totally wild")


def test_pi_powers():
    # pi^2 = 3 in the ramified quadratic model
    assert fe_pi_pow(2, RAM32) == fe_from_int(3, RAM32)
    assert fe_pi_pow(-2, RAM32) == fe_from_mpq(mpq(1, 3), RAM32)
    assert fe_pi_pow(3, RAM32) == (mpq(0), mpq(3))
    assert fe_pi_pow(-1, RAM32) == (mpq(0), mpq(1, 3))
    assert fe_pi_pow(5, UNR22) == (mpq(32),)
    assert fe_mul(fe_pi_pow(-7, RAM23), fe_pi_pow(7, RAM23), RAM23) == fe_one(RAM23)


def test_valuation_examples():
    # v(c0 + c1 pi) = min(e vp(c0), e vp(c1) + 1)
    x = (mpq(-2, 3), mpq(1))  # -2/3 + pi at (3,2,ram)
    assert fe_valuation(x, RAM32) == -2
    assert fe_valuation(fe_from_int(9, RAM32), RAM32) == 4
    assert fe_valuation(fe_pi_pow(-3, RAM32), RAM32) == -3
    assert fe_valuation(fe_zero(RAM32), RAM32) == INFINITE
    assert fe_valuation(fe_from_int(8, UNR22), UNR22) == 3
    assert fe_valuation(fe_from_mpq(mpq(3, 4), UNR22), UNR22) == -2


def test_infinity_marker_is_order_safe():
    vals = [fe_valuation(fe_zero(RAM32), RAM32), 5, -3, 0]
    assert sorted(vals) == [-3, 0, 5, INFINITE]


coord = st.builds(
    mpq,
    st.integers(min_value=-(10**6), max_value=10**6),
    st.integers(min_value=1, max_value=10**4),
)


def elems(spec):
    return st.tuples(*([coord] * spec.field_degree))


@settings(max_examples=150, deadline=None)
@given(x=elems(RAM32), y=elems(RAM32))
def test_valuation_multiplicative_ram(x, y):
    spec = RAM32
    vx, vy = fe_valuation(x, spec), fe_valuation(y, spec)
    vxy = fe_valuation(fe_mul(x, y, spec), spec)
    if vx == INFINITE or vy == INFINITE:
        assert vxy == INFINITE
    else:
        assert vxy == vx + vy


@settings(max_examples=150, deadline=None)
@given(x=elems(RAM23), y=elems(RAM23))
def test_valuation_ultrametric_ram(x, y):
    spec = RAM23
    s = fe_add(x, y, spec)
    vs = fe_valuation(s, spec)
    m = min(fe_valuation(x, spec), fe_valuation(y, spec))
    assert vs >= m
    if fe_valuation(x, spec) != fe_valuation(y, spec):
        assert vs == m


@settings(max_examples=100, deadline=None)
@given(x=elems(RAM23))
def test_inverse_roundtrip(x):
    spec = RAM23
    if fe_is_zero(x):
        with pytest.raises(ZeroDivisionError):
            fe_inv(x, spec)
    else:
        assert fe_mul(x, fe_inv(x, spec), spec) == fe_one(spec)
        assert fe_valuation(fe_inv(x, spec), spec) == -fe_valuation(x, spec)


@settings(max_examples=100, deadline=None)
@given(x=elems(RAM32), y=elems(RAM32), z=elems(RAM32))
def test_ring_axioms(x, y, z):
    spec = RAM32
    assert fe_mul(x, y, spec) == fe_mul(y, x, spec)
    assert fe_mul(x, fe_add(y, z, spec), spec) == fe_add(
        fe_mul(x, y, spec), fe_mul(x, z, spec), spec
    )
    assert fe_mul(fe_mul(x, y, spec), z, spec) == fe_mul(x, fe_mul(y, z, spec), spec)
    assert fe_sub(x, x, spec) == fe_zero(spec)
    assert fe_add(x, fe_neg(x, spec), spec) == fe_zero(spec)


def test_pow_and_div():
    x = (mpq(2), mpq(5))
    spec = RAM32
    assert fe_pow(x, 3, spec) == fe_mul(x, fe_mul(x, x, spec), spec)
    assert fe_pow(x, 0, spec) == fe_one(spec)
    assert fe_div(fe_pow(x, 2, spec), x, spec) == x
    assert fe_pow(x, -2, spec) == fe_inv(fe_pow(x, 2, spec), spec)


@settings(max_examples=100, deadline=None)
@given(x=elems(RAM32))
def test_serialize_roundtrip_ram(x):
    s = fe_serialize(x, RAM32)
    assert fe_deserialize(s, RAM32) == x
    assert all(ch in "0123456789-/;" for ch in s)


def test_serialize_format():
    x = (mpq(-2, 3), mpq(1))
    assert fe_serialize(x, RAM32) == "-2/3;1/1"
    assert fe_deserialize("-2/3;1/1", RAM32) == x
    with pytest.raises(ValueError):
        fe_deserialize("1/2", RAM32)  # wrong coordinate count
    with pytest.raises(ValueError):
        fe_deserialize("3;4", UNR22)  # missing denominator


# residue ring o_L/pi^m: group structure and the order of 1
#
# expected invariant factors come from writing m = e k + r, 1 <= r <= e:
# (Z/p^k)^(f(e-r)) x (Z/p^(k+1))^(f r), checked independently by SNF inside
# residue_group_structure.

CASES = [
    (RAM32, 1, [3]),
    (RAM32, 2, [3, 3]),
    (RAM32, 3, [3, 9]),
    (RAM32, 4, [9, 9]),
    (RAM32, 7, [27, 81]),
    (RAM23, 1, [2]),
    (RAM23, 2, [2, 2]),
    (RAM23, 3, [2, 2, 2]),
    (RAM23, 4, [2, 2, 4]),
    (RAM23, 8, [4, 8, 8]),
    (UNR22, 1, [2, 2]),
    (UNR22, 3, [8, 8]),
    (UNR53, 2, [25, 25, 25]),
]


@pytest.mark.parametrize("spec,m,expected", CASES)
def test_residue_group_structure(spec, m, expected):
    assert residue_group_structure(spec, m) == expected


@pytest.mark.parametrize("spec", SPECS)
@pytest.mark.parametrize("m", range(0, 9))
def test_residue_group_order(spec, m):
    factors = residue_group_structure(spec, m)
    total = 1
    for t in factors:
        total *= t
    assert total == spec.q**m


@pytest.mark.parametrize("spec", SPECS)
@pytest.mark.parametrize("m", range(1, 9))
def test_order_of_one(spec, m):
    k = (m - 1) // spec.e
    assert order_of_one(spec, m) == spec.p ** (k + 1)


def test_order_of_one_divides_group_exponent():
    for spec in SPECS:
        for m in range(1, 7):
            factors = residue_group_structure(spec, m)
            assert factors[-1] % order_of_one(spec, m) == 0
