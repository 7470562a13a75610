import itertools
import random

import pytest

from pncurves.errors import NotInvertible, OutOfDomain, PresentationMismatch, UnsupportedOperation
from pncurves.exactalg import BaseField, TriangularPresentation, monomial_ring, random_element
from pncurves.skewpoly import (
    SkewPoly,
    commutator,
    conjugate_by_unit,
    fil_level,
    is_nilpotent_skew,
    is_unit_skew,
    matmul,
    matrix_rep,
    parse_skew,
    skew_inverse,
    skew_mul,
    split_unit,
)

from conftest import SEED


def rand_skew(R, rng, deg, unit=False, fil1=False):
    cs = [random_element(R, rng, density=0.4) for _ in range(deg + 1)]
    if unit or fil1:
        cs[0] = R.one() if fil1 else R.const(rng.randrange(1, R.base.p)) + (cs[0] - R.const(cs[0].constant_term()))
        # higher coefficients must be nilpotent for a unit
        cs[1:] = [c - R.const(c.constant_term()) for c in cs[1:]]
    return SkewPoly(R, cs)


def test_frobenius_commutation_rule():
    R = monomial_ring(3, {"a": 9})
    a = R.gen("a")
    F = SkewPoly.frobenius_gen(R)
    assert F * SkewPoly(R, [a]) == SkewPoly(R, [0, a**3])
    assert SkewPoly(R, [a]) * F == SkewPoly(R, [0, a])


def test_parse_and_print():
    R = monomial_ring(2, {"l1": 4, "l2": 2})
    x = parse_skew("1 + l1*F + l2*F^2", R)
    assert x.coeffs == (R.one(), R.gen("l1"), R.gen("l2"))
    assert parse_skew(str(x), R) == x
    assert x.additive_str("x") == "x + l1*x^2 + l2*x^4"
    with pytest.raises(PresentationMismatch):
        parse_skew("1 + l1*F", R, var="l1")


def _naive_mul(a, b):
    # product written as sums of monomials lam F^i, using F c = c^p F directly
    R = a.ring
    out = SkewPoly(R, [])
    for i, lam in enumerate(a.coeffs):
        for j, mu in enumerate(b.coeffs):
            tw = mu
            for _ in range(i):
                tw = tw ** R.base.p
            out = out + SkewPoly(R, [R.zero()] * (i + j) + [lam * tw])
    return out


def test_exhaustive_small_ring():
    R = monomial_ring(2, {"lam": 2})
    elems = [R.zero(), R.one(), R.gen("lam"), R.parse("1 + lam")]
    polys = [SkewPoly(R, list(cs)) for cs in itertools.product(elems, repeat=3)]
    for a in polys:
        for b in polys:
            assert skew_mul(a, b) == _naive_mul(a, b)
        unit = is_unit_skew(a)
        assert unit == (a.coeff(0).constant_term() == 1 and all(c.constant_term() == 0 for c in a.coeffs[1:]))
        if unit:
            inv = skew_inverse(a)
            assert a * inv == SkewPoly.one(R) == inv * a
        elif a.coeffs and a.coeff(0).constant_term():
            with pytest.raises(NotInvertible):
                skew_inverse(a)


def test_nilpotent_skew():
    R = monomial_ring(2, {"lam": 4})
    lam = R.gen("lam")
    x = SkewPoly(R, [lam, lam**2])
    assert is_nilpotent_skew(x)
    acc = x
    for _ in range(8):
        acc = acc * x
    assert acc.is_zero()
    assert not is_nilpotent_skew(SkewPoly(R, [0, 1]))


@pytest.mark.parametrize("p,degs", [(2, {"a": 4, "b": 2}), (3, {"a": 9, "b": 3}), (5, {"a": 5})])
def test_associativity_and_inverse(p, degs):
    R = monomial_ring(p, degs)
    rng = random.Random(SEED + p)
    for _ in range(60):
        a, b, c = (rand_skew(R, rng, rng.randrange(0, 4)) for _ in range(3))
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
        u = rand_skew(R, rng, rng.randrange(1, 4), unit=True)
        ui = skew_inverse(u)
        assert u * ui == SkewPoly.one(R)
        assert ui * u == SkewPoly.one(R)
        # degree bound from the nilpotency index
        assert ui.degree <= (R.nilpotency_bound() - 1) * u.degree


def test_inverse_over_tail_ring():
    K = BaseField(3, ("t",))
    R = TriangularPresentation(K, [("e", 3), ("y", (3, "t + e"))])
    u = parse_skew("1 + e*F + e*y*F^2", R)
    assert u * skew_inverse(u) == SkewPoly.one(R)


def test_inverse_rejected_over_infinite_ring():
    R = TriangularPresentation(BaseField(2), [("x", None)])
    with pytest.raises(UnsupportedOperation):
        is_unit_skew(SkewPoly(R, [1, R.gen("x")]))


def test_negative_power():
    R = monomial_ring(2, {"a": 4})
    u = parse_skew("1 + a*F", R)
    assert u ** -3 * u**3 == SkewPoly.one(R)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_matrix_representation_multiplicative(d):
    R = monomial_ring(2, {"a": 8, "b": 4})
    rng = random.Random(SEED + d)
    for _ in range(200):
        a = rand_skew(R, rng, rng.randrange(0, 4))
        b = rand_skew(R, rng, rng.randrange(0, 4))
        assert matrix_rep(a * b, d) == matmul(matrix_rep(a, d), matrix_rep(b, d))


def test_matrix_representation_injective_below_d():
    R = monomial_ring(2, {"a": 4})
    rng = random.Random(SEED)
    seen = {}
    for _ in range(200):
        a = rand_skew(R, rng, rng.randrange(0, 3))
        key = tuple(tuple(row) for row in matrix_rep(a, 3))
        if key in seen:
            assert seen[key] == a
        seen[key] = a


def test_fil_level_and_commutator():
    R = monomial_ring(2, {"a": 8, "b": 8})
    rng = random.Random(SEED)
    for _ in range(40):
        x = rand_skew(R, rng, 3, fil1=True)
        y = rand_skew(R, rng, 3, fil1=True)
        fx, fy = fil_level(x), fil_level(y)
        c = commutator(x, y)
        assert fil_level(c) >= fx + fy
    assert fil_level(SkewPoly.one(R)) == float("inf")
    assert fil_level(parse_skew("1 + a*F^2", R)) == 2
    with pytest.raises(OutOfDomain):
        fil_level(parse_skew("a + F", R))


def test_split_and_conjugate():
    K = BaseField(3, ("t",))
    R = TriangularPresentation(K, [("a", 9)])
    rng = random.Random(SEED)
    for _ in range(30):
        x = rand_skew(R, rng, 3, unit=True)
        x = SkewPoly(R, [x.coeff(0) * R.const(K.param("t") + 1)] + list(x.coeffs[1:]))
        f, lam0 = split_unit(x)
        assert fil_level(f) >= 1
        assert f * SkewPoly(R, [lam0]) == x
        mu = R.const(K.param("t")) + R.gen("a")
        conj = conjugate_by_unit(f, mu)
        for i, c in enumerate(conj.coeffs):
            assert c * mu.frobenius(i) == mu * f.coeff(i)
