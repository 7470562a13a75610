import itertools
import random

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from pncurves.errors import (
    NotInvertible,
    PresentationMismatch,
    UndecidableHere,
    UnsupportedOperation,
)
from pncurves.exactalg import (
    BaseField,
    FieldElem,
    TriangularPresentation,
    format_elem,
    is_nilpotent,
    is_unit,
    monomial_coordinates,
    monomial_ring,
    normal_form,
    random_element,
    ring_arith,
)

from conftest import SEED


def tower(p):
    K = BaseField(p, ("alpha",))
    return TriangularPresentation(K, [("y", (p * p, "alpha"))])


# -- normal form -------------------------------------------------------------


@pytest.mark.parametrize("p", [2, 3, 5])
def test_substitution_examples(p):
    K = BaseField(p, ("alpha",))
    R = TriangularPresentation(K, [("y", (p, "alpha"))])
    assert normal_form(f"y^{p}", R) == R.const(K.param("alpha"))
    N = monomial_ring(p, {"lam": p})
    assert normal_form(f"lam^{p}", N).is_zero()
    T = tower(p)
    assert normal_form(f"y^{p * p + 1}", T) == T.parse("alpha*y")


def test_unknown_variable():
    R = monomial_ring(2, {"a": 2})
    with pytest.raises(PresentationMismatch):
        normal_form("a + b", R)


def test_triangularity_enforced():
    with pytest.raises(ValueError):
        TriangularPresentation(BaseField(2), [("a", (2, "b")), ("b", 2)])


def test_normal_form_idempotent_and_homomorphic(rng):
    K = BaseField(3, ("t",))
    R = TriangularPresentation(K, [("a", 3), ("y", (3, "t + a")), ("x", None)])
    for _ in range(50):
        a = random_element(R, rng, density=0.2)
        b = random_element(R, rng, density=0.2)
        assert normal_form(a, R) == a
        assert R.parse(str(a)) == a
        raw = f"({a})*({b}) + ({a})"
        assert R.parse(raw) == a * b + a


def test_chained_tails_reduce():
    # y^3 = a, z^2 = y + 1, so z^6 = (y + 1)^3 = a + 1 + 3(...) in char 3
    R = TriangularPresentation(BaseField(3), [("a", 3), ("y", (3, "a")), ("z", (2, "y + 1"))])
    z = R.gen("z")
    assert z**6 == R.parse("a + 1")


# -- ring arithmetic ---------------------------------------------------------


def test_ring_arith_examples():
    R = monomial_ring(2, {"l1": 4, "l2": 2})
    a = R.parse("l1 + l2")
    assert ring_arith("mul", a, R.gen("l1")) == R.parse("l1^2 + l1*l2")
    assert ring_arith("mul", a, R.zero()).is_zero()
    with pytest.raises(UnsupportedOperation):
        ring_arith("pow", a, -1)
    S = monomial_ring(2, {"l1": 4})
    with pytest.raises(PresentationMismatch):
        ring_arith("mul", a, S.gen("l1"))


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_freshmans_dream(p):
    R = monomial_ring(p, {"lam": p})
    assert (1 + R.gen("lam")) ** p == R.one()
    # direct expansion with binomials, no Frobenius shortcut
    lam = R.gen("lam")
    acc = R.one()
    for _ in range(p):
        acc = acc * (1 + lam)
    assert acc == R.one()


def _presentations():
    K = BaseField(2, ("t",))
    return [
        monomial_ring(2, {"l1": 4, "l2": 2}),
        monomial_ring(3, {"a": 3, "b": 9}),
        TriangularPresentation(BaseField(3, ("alpha",)), [("y", (9, "alpha"))]),
        TriangularPresentation(K, [("a", 2), ("y", (4, "t*a + t"))]),
        TriangularPresentation(BaseField(5), [("y", (2, "3")), ("x", None)]),
    ]


@pytest.mark.parametrize("idx", range(5))
def test_ring_axioms_many_triples(idx):
    R = _presentations()[idx]
    rng = random.Random(SEED + idx)
    for _ in range(1000):
        a, b, c = (random_element(R, rng, density=0.15, max_free_degree=2) for _ in range(3))
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
        assert a * b == b * a
        assert a + (b - a) == b


def test_pow_matches_repeated_multiplication(rng):
    for R in _presentations():
        for _ in range(20):
            a = random_element(R, rng, density=0.3, max_free_degree=1)
            e = rng.randrange(0, 12)
            acc = R.one()
            for _ in range(e):
                acc = acc * a
            assert a**e == acc


# -- nilpotent / unit --------------------------------------------------------


def test_nilpotent_examples():
    R = monomial_ring(2, {"l1": 4, "l2": 2})
    assert is_nilpotent(R.parse("l1*l2"))
    assert not is_nilpotent(R.parse("1 + l1"))
    for p in (2, 3):
        assert not is_nilpotent(tower(p).gen("y"))


def test_unit_examples():
    R = monomial_ring(2, {"l1": 4, "l2": 2})
    assert is_unit(R.parse("1 + l1"))
    assert not is_unit(R.parse("l1"))
    K = BaseField(3, ("alpha",))
    S = TriangularPresentation(K, [("y", (3, "alpha"))])
    y = S.gen("y")
    assert is_unit(y)
    assert y.inverse() == S.parse("y^2") * S.const(K.param("alpha")).constant_term().inverse()


def test_free_variable_nilpotency_undecidable():
    R = TriangularPresentation(BaseField(2), [("a", 2), ("x", None)])
    assert is_nilpotent(R.gen("a"))
    with pytest.raises(UndecidableHere):
        is_nilpotent(R.gen("x"))
    with pytest.raises(UnsupportedOperation):
        is_unit(R.gen("a"))


def _all_elements(R):
    base = R.basis()
    for coeffs in itertools.product(range(R.base.p), repeat=len(base)):
        yield R._from_raw({e: c for e, c in zip(base, coeffs) if c})


def _brute_nilpotent(a):
    x = a
    for _ in range(a.pres.rank + 1):
        if x.is_zero():
            return True
        x = x * a
    return x.is_zero()


def _brute_unit(a):
    # an element of a finite ring is a unit iff some power is 1
    seen = set()
    x = a
    while x not in seen:
        if x == 1:
            return True
        seen.add(x)
        x = x * a
    return False


def test_exhaustive_small_ring():
    R = monomial_ring(2, {"lam": 4})
    for a in _all_elements(R):
        nil, unit = is_nilpotent(a), is_unit(a)
        assert nil == _brute_nilpotent(a)
        assert unit == _brute_unit(a)
        # local ring: exactly one of the two
        assert nil != unit
        assert unit == (a.constant_term() != 0)


def test_non_local_ring_brute_force():
    # F_3[y]/(y^2 - 1) = F_3 x F_3 is not local: y - 1 is neither
    R = TriangularPresentation(BaseField(3), [("y", (2, "1"))])
    for a in _all_elements(R):
        assert is_nilpotent(a) == _brute_nilpotent(a)
        assert is_unit(a) == _brute_unit(a)
    z = R.parse("y + 2")
    assert not is_nilpotent(z) and not is_unit(z)


def test_nilpotency_needs_rank_bound_for_tails():
    # y^2 = 0 forces z^4 = 0; bound 1 + sum(d_i - 1) = 3 is too small here
    R = TriangularPresentation(BaseField(2), [("y", 2), ("z", (2, "y"))])
    z = R.gen("z")
    assert (z**3).is_zero() is False
    assert is_nilpotent(z)
    assert _brute_nilpotent(z)


def test_random_units_invert(rng):
    for R in _presentations()[:4]:
        for _ in range(30):
            a = random_element(R, rng, density=0.3)
            if is_unit(a):
                assert a * a.inverse() == 1
            else:
                with pytest.raises(NotInvertible):
                    a.inverse()


# -- coordinates -------------------------------------------------------------


def test_coordinates_examples():
    R = monomial_ring(2, {"l1": 4, "l2": 2})
    one = monomial_coordinates(R.one())
    assert one == [1] + [0] * 7
    v = monomial_coordinates(R.parse("l1 + l1*l2"))
    assert sum(v) == 2 and v[2] == 1 and v[3] == 1


def test_coordinates_linear(rng):
    for R in _presentations()[:4]:
        for _ in range(50):
            a, b = random_element(R, rng), random_element(R, rng)
            ca, cb = monomial_coordinates(a), monomial_coordinates(b)
            cs = monomial_coordinates(a + b)
            assert all(R.base.is_zero(z - x - y) for z, x, y in zip(cs, ca, cb))


# -- fractions ---------------------------------------------------------------


poly_terms = st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)), st.integers(1, 4), max_size=4)


@given(poly_terms, poly_terms, poly_terms)
def test_fraction_equality_matches_sympy(n1, d1, m):
    K = BaseField(5, ("s", "t"))
    if not d1 or not m:
        return
    a = FieldElem(K, {e: c % 5 for e, c in n1.items()}, {e: c % 5 for e, c in d1.items()})
    mult = FieldElem(K, {e: c % 5 for e, c in m.items()}, None)
    b = FieldElem(K, (a * mult).num, (a * mult).den) / mult
    s, t = sympy.symbols("s t")

    def to_expr(x):
        num = sum(c * s**e[0] * t**e[1] for e, c in x.num.items())
        den = sum(c * s**e[0] * t**e[1] for e, c in x.den.items())
        return sympy.Poly(num, s, t, modulus=5), sympy.Poly(den, s, t, modulus=5)

    na, da = to_expr(a)
    nb, db = to_expr(b)
    assert a == b
    assert (na * db - nb * da).is_zero
    assert hash(a) == hash(b)
    assert a.reduced() == b.reduced()


def test_fraction_basics():
    K = BaseField(3, ("t",))
    t = K.param("t")
    assert (t + 1) / (t * t + 2 * t + 1) == 1 / (t + 1)
    assert str((t + 1) / (t * t + 2 * t + 1)) == "(1)/(t + 1)"
    with pytest.raises(NotInvertible):
        K.zero.inverse()
    assert (t / t) == 1


def test_print_parse_round_trip(rng):
    K = BaseField(3, ("t", "u"))
    R = TriangularPresentation(K, [("a", 3), ("y", (3, "t*a + u")), ("x", None)])
    for _ in range(40):
        a = random_element(R, rng, density=0.2, max_free_degree=2)
        a = a * R.const(K.param("t") / (K.param("u") + 1))
        assert R.parse(format_elem(a)) == a


def test_non_prime_characteristic_rejected():
    with pytest.raises(ValueError):
        BaseField(4)
