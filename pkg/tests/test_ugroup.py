import random

import pytest

from pncurves.errors import ConsistencyError, OutOfDomain, ResourceBudgetExceeded
from pncurves.exactalg import BaseField, TriangularPresentation, random_element
from pncurves.skewpoly import SkewPoly, matmul, matrix_rep
from pncurves.ugroup import (
    GroupElement,
    UnElement,
    act_on_polynomial,
    adjoint_by_conjugation,
    adjoint_matrix,
    central_member,
    commutator_formula_check,
    compose,
    frobenius_map,
    group_inverse,
    level_rank,
    un_commutator,
    un_inverse,
    un_order,
    universal_ring,
    verify_central_series,
    violated_constraint,
)

from conftest import SEED

CELLS = [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (5, 1)]


def random_point(ring, n, rng):
    """Random element of U_n(ring): coordinates built from ring generators
    that already satisfy the level constraints."""
    p = ring.base.p
    cs = []
    for i in range(1, n + 1):
        c = ring.zero()
        for name in ring.names:
            # generators of the three generic points have exponent bound p^(n-i+1) at slot i
            if name[-1] == str(i) and rng.random() < 0.7:
                c = c + ring.const(rng.randrange(1, p)) * ring.gen(name)
        cs.append(c)
    return UnElement(ring, cs)


@pytest.mark.parametrize("p,n", CELLS)
def test_group_axioms(p, n):
    ring = universal_ring(p, n, ("a", "b", "c"), max_rank=10**7)
    rng = random.Random(SEED + 10 * p + n)
    e = UnElement.identity(ring, n)
    for _ in range(10):
        x, y, z = (random_point(ring, n, rng) for _ in range(3))
        assert (x * y) * z == x * (y * z)
        assert x * e == x == e * x
        assert x * un_inverse(x) == e
        assert violated_constraint(x * y) is None


def test_generic_points_closed():
    for p, n in CELLS:
        ring = universal_ring(p, n, ("l", "m"), max_rank=10**7)
        x = UnElement.generic(ring, n, "l")
        y = UnElement.generic(ring, n, "m")
        assert violated_constraint(x * y) is None
        assert violated_constraint(un_inverse(x)) is None


def test_order_and_budget():
    assert un_order(2, 2) == 8
    assert un_order(3, 3) == 3**6
    ring = universal_ring(3, 2)
    assert ring.rank == un_order(3, 2)
    with pytest.raises(ResourceBudgetExceeded):
        universal_ring(3, 3, ("l", "m"), max_rank=1000)


def test_constraint_violation_detected():
    R = TriangularPresentation(BaseField(2), [("t", 8)])
    with pytest.raises(OutOfDomain):
        UnElement(R, [R.gen("t")])  # t^4 != 0 but level 1 needs lam_1^2 = 0
    assert violated_constraint(UnElement(R, [R.gen("t") ** 4], check=False)) is None


@pytest.mark.parametrize("p,n", [(2, 2), (2, 3), (3, 2), (3, 1)])
def test_frobenius_homomorphism_and_kernel(p, n):
    # slot n has constraint lam_n^p = 0, so generic points are in the domain
    ring = universal_ring(p, n, ("l", "m"))
    x = UnElement.generic(ring, n, "l")
    y = UnElement.generic(ring, n, "m")
    assert frobenius_map(x * y) == frobenius_map(x) * frobenius_map(y)
    assert frobenius_map(un_inverse(x)) == un_inverse(frobenius_map(x))
    # kernel: lam_i^p = 0 for every i, e.g. p^(n-i)-th powers of the generators
    k = UnElement(ring, [ring.gen(f"l{i}") ** (p ** (n - i)) for i in range(1, n + 1)])
    assert frobenius_map(k) == UnElement.identity(ring, n - 1)
    assert frobenius_map(x) != UnElement.identity(ring, n - 1) or n == 1


def test_frobenius_requires_top_slot_killed():
    R = TriangularPresentation(BaseField(2), [("t", 4)])
    x = UnElement(R, [R.gen("t")], check=False)
    with pytest.raises(ConsistencyError):
        frobenius_map(x)


@pytest.mark.parametrize("p,n", [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2)])
def test_adjoint_matches_conjugation_oracle(p, n):
    ring = universal_ring(p, n)
    x = UnElement.generic(ring, n)
    assert adjoint_matrix(x) == adjoint_by_conjugation(x)


@pytest.mark.parametrize("p,n", [(2, 2), (3, 2), (2, 3)])
def test_central_series(p, n):
    rep = verify_central_series(p, n)
    assert rep.passed, rep.lines()


def test_level_ranks():
    for p, n in CELLS:
        assert level_rank(p, n, 0) == 1
        assert level_rank(p, n, n) == un_order(p, n)


def test_central_member_bounds():
    ring = universal_ring(2, 2)
    x = UnElement.generic(ring, 2)
    assert central_member(x, 2)
    assert not central_member(x, 1)
    with pytest.raises(OutOfDomain):
        central_member(x, 3)


@pytest.mark.parametrize("p,n", [(2, 2), (3, 2), (2, 3)])
def test_commutator_formula(p, n):
    for s in range(1, n):
        assert commutator_formula_check(p, n, s)
    with pytest.raises(OutOfDomain):
        commutator_formula_check(p, n, n)


@pytest.mark.parametrize("d", [3, 4])
def test_unitriangular_model(d):
    # U_n embeds in upper unitriangular d x d matrices; commutators of
    # elements of Fil^i and Fil^j land in Fil^(i+j), matching the
    # superdiagonal filtration of UT_d
    p, n = 2, 3
    ring = universal_ring(p, n, ("l", "m"))
    x = UnElement.generic(ring, n, "l")
    y = UnElement.generic(ring, n, "m")
    mx, my = matrix_rep(x.to_skew(), d), matrix_rep(y.to_skew(), d)
    for r in range(d):
        assert mx[r][r] == 1
        assert all(not mx[r][s] for s in range(r))
    assert matrix_rep((x * y).to_skew(), d) == matmul(mx, my)
    c = un_commutator(x, y)
    mc = matrix_rep(c.to_skew(), d)
    assert all(not mc[r][r + 1] for r in range(d - 1))


# -- Ga x| U_n x| Gm --------------------------------------------------------


def _action_ring(p):
    # two generic U_1 points plus invertible scalars and translations
    K = BaseField(p)
    return TriangularPresentation(K, [
        ("s", p), ("t", p), ("w", p), ("a1", p), ("a2", p), ("a3", p),
    ])


def _rand_group(R, rng):
    p = R.base.p
    m = R.const(rng.randrange(1, p)) + random_element(R, rng, density=0.2) * R.gen("s")
    a = random_element(R, rng, density=0.2) * R.gen("a1")
    lam = random_element(R, rng, density=0.2) * R.gen("t")
    return GroupElement(a, UnElement(R, [lam]), m)


@pytest.mark.parametrize("p", [2, 3])
def test_action_axiom(p):
    R = _action_ring(p)
    rng = random.Random(SEED + p)
    for _ in range(200):
        g, h, k = (_rand_group(R, rng) for _ in range(3))
        q = [random_element(R, rng, density=0.1) for _ in range(3)]
        left = act_on_polynomial(h, act_on_polynomial(g, q))
        right = act_on_polynomial(compose(g, h), q)
        assert left == right
        assert compose(compose(g, h), k) == compose(g, compose(h, k))
        e = GroupElement.identity(R, 1)
        assert compose(g, group_inverse(g)) == e == compose(group_inverse(g), g)


def test_compose_examples():
    R = TriangularPresentation(BaseField(3), [("s", 3), ("t", 3)])
    s, t = R.gen("s"), R.gen("t")
    tr = GroupElement.translation(s, 1)
    sc = GroupElement.scaling(R.const(2), 1)
    # phi_tr(phi_sc(x)) = 2x + s
    g = compose(tr, sc)
    assert g.image_of_x() == [s, R.const(2)]
    # phi_sc(phi_tr(x)) = 2(x + s)
    assert compose(sc, tr).image_of_x() == [2 * s, R.const(2)]
    u = GroupElement.unipotent(UnElement(R, [t]))
    assert u.image_of_x() == [R.zero(), R.one(), R.zero(), t]


def test_additive_locus():
    R = _action_ring(2)
    rng = random.Random(SEED)
    for _ in range(50):
        g = _rand_group(R, rng)
        img = g.image_of_x()
        additive = all(not c for i, c in enumerate(img) if i & (i - 1) or i == 0)
        assert additive == (not g.a)


def test_contract_examples():
    p = 2
    ring = universal_ring(p, 2, ("l", "m"))
    l1, l2, m1, m2 = ring.gens()
    x, y = UnElement.generic(ring, 2, "l"), UnElement.generic(ring, 2, "m")
    assert (x * y).coeffs == (l1 + m1, l2 + m2 + l1 * m1**p)
    z = UnElement(ring, [l1, ring.zero()])
    assert un_inverse(z).coeffs == (l1, l1 ** (1 + p))
    assert frobenius_map(x).coeffs == (l1**2,)
    ad = adjoint_matrix(x)
    assert [row[0] for row in ad] == [ring.one(), l1**2]
    e = UnElement.identity(ring, 2)
    assert adjoint_matrix(e) == [[1, 0], [0, 1]]
    w = UnElement(ring, [ring.zero(), l2])
    assert central_member(w, 1) and not central_member(w, 0)


def test_conjugations():
    R = TriangularPresentation(BaseField(2), [("l1", 4), ("l2", 2), ("al", 16), ("mu", 4)])
    l1, l2, al, mu = R.gens()
    P = GroupElement.unipotent(UnElement(R, [l1, l2]))
    tr = GroupElement.translation(al, 2)
    conj = compose(compose(P, tr), group_inverse(P))
    assert conj == GroupElement.translation(al + l1 * al**2 + l2 * al**4, 2)
    sc = GroupElement.scaling(1 + mu, 2)
    c2 = compose(compose(sc, P), group_inverse(sc))
    # coefficients mu^(1 - p^i) lam_i
    mi = (1 + mu).inverse()
    assert c2.u.coeffs == (l1 * mi, l2 * mi**3)
    assert c2.m == 1 and c2.a.is_zero()


def test_action_on_x():
    R = universal_ring(3, 1)
    g = GroupElement.unipotent(UnElement.generic(R, 1))
    assert act_on_polynomial(g, [0, 1]) == [R.zero(), R.one(), R.zero(), R.gen("l1")]
    e = GroupElement.identity(R, 1)
    q = [R.one(), R.gen("l1"), R.one()]
    assert act_on_polynomial(e, q) == q
