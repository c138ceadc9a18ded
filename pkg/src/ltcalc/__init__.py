"""Exact arithmetic for Lubin-Tate formal groups over small p-adic fields.

Everything here is exact: field elements are vectors of rationals, series are
truncated with explicit bounds, and eliminations over the valuation ring are
either pure rational arithmetic or fixed-precision modular arithmetic with a
proven exactness margin.
"""

from .extension import (
    ExtensionSpec,
    FieldElem,
    INFINITE,
    ConsistencyError,
    make_extension,
    fe_zero,
    fe_one,
    fe_from_int,
    fe_from_mpq,
    fe_pi_pow,
    fe_add,
    fe_sub,
    fe_neg,
    fe_mul,
    fe_inv,
    fe_div,
    fe_scale,
    fe_is_zero,
    fe_valuation,
    fe_serialize,
    fe_deserialize,
    residue_group_structure,
    order_of_one,
)

__all__ = [
    "ExtensionSpec",
    "FieldElem",
    "INFINITE",
    "ConsistencyError",
    "make_extension",
    "fe_zero",
    "fe_one",
    "fe_from_int",
    "fe_from_mpq",
    "fe_pi_pow",
    "fe_add",
    "fe_sub",
    "fe_neg",
    "fe_mul",
    "fe_inv",
    "fe_div",
    "fe_scale",
    "fe_is_zero",
    "fe_valuation",
    "fe_serialize",
    "fe_deserialize",
    "residue_group_structure",
    "order_of_one",
]
