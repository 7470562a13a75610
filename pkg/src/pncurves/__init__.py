"""Exact algebra for the curves X_{p,n}: skew polynomials, the group schemes
U_n, the numerical semigroups Gamma_{p,n}, equivariant compactification
checks and Russell forms."""

from .exactalg import (
    BaseField,
    FieldElem,
    RingElem,
    TriangularPresentation,
    is_nilpotent,
    is_unit,
    monomial_coordinates,
    monomial_ring,
    normal_form,
    ring_arith,
)
from .numsemigroup import NumericalSemigroup, from_generators, gamma_pn, invariant_formulas
from .skewpoly import SkewPoly, skew_inverse, skew_mul
from .ugroup import GroupElement, UnElement, universal_ring

__version__ = "0.1.0"

__all__ = [
    "BaseField",
    "FieldElem",
    "GroupElement",
    "NumericalSemigroup",
    "RingElem",
    "SkewPoly",
    "TriangularPresentation",
    "UnElement",
    "from_generators",
    "gamma_pn",
    "invariant_formulas",
    "is_nilpotent",
    "is_unit",
    "monomial_coordinates",
    "monomial_ring",
    "normal_form",
    "ring_arith",
    "skew_inverse",
    "skew_mul",
    "universal_ring",
]
