import random

import pytest

from pncurves.errors import UnsupportedOperation
from pncurves.exactalg import BaseField
from pncurves.twistforms import (
    AdditivePoly,
    additive_gcd,
    cohomology_index,
    cohomology_relation_element,
    dense_str,
    find_trivializing_witness,
    is_additive_dense,
    is_ga_twist,
    is_pth_power_ratfunc,
    pth_root_ratfunc,
    russell_form,
    russell_level1_control,
    russell_level2_control,
    torsor_action_control,
    verify_russell_level1,
    verify_russell_level2,
    verify_torsor_action,
)

from conftest import SEED


def test_russell_form_examples():
    f = russell_form(2, 1)
    assert f.phi.to_str("u") == "u^2"
    assert f.psi.to_str("v") == "v + alpha*v^2"  # -alpha = alpha in characteristic 2
    f = russell_form(3, 1)
    assert f.phi.to_str("u") == "u^3"
    assert f.psi.to_str("v") == "v + 2*alpha*v^3"
    f = russell_form(2, 2)
    assert f.phi.to_str("u") == "u^4"
    assert f.psi.to_str("v") == "v + alpha*v^2 + beta^2*v^4"
    with pytest.raises(UnsupportedOperation):
        russell_form(2, 3)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_gcd_of_russell_forms(p):
    for level in (1, 2) if p < 5 else (1,):
        f = russell_form(p, level)
        g = additive_gcd(f.phi, f.psi)
        assert dense_str(g, f.base) == "u"
        assert is_ga_twist(f.phi, f.psi)


def test_gcd_examples():
    K = BaseField(3, ("alpha",))
    up = AdditivePoly(K, [0, 1])
    assert dense_str(additive_gcd(up, up), K) == "u^3"
    u = AdditivePoly(K, [1])
    zero = AdditivePoly(K, [])
    assert is_ga_twist(u, zero)
    # u^2 and u^2 + u^4 over F_2 share the kernel of u -> u^2
    F2 = BaseField(2)
    a = AdditivePoly(F2, [0, 1])
    b = AdditivePoly(F2, [0, 1, 1])
    assert dense_str(additive_gcd(a, b), F2) == "u^2"
    assert not is_ga_twist(a, b)


def test_gcd_is_additive_random():
    rng = random.Random(SEED)
    for p in (2, 3):
        K = BaseField(p)
        for _ in range(60):
            a = AdditivePoly(K, [rng.randrange(p) for _ in range(rng.randrange(1, 4))])
            b = AdditivePoly(K, [rng.randrange(p) for _ in range(rng.randrange(1, 4))])
            if not a.coeffs and not b.coeffs:
                continue
            g = additive_gcd(a, b)
            assert is_additive_dense(g, K)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_level1(p):
    assert verify_russell_level1(p)
    assert russell_level1_control(p)


@pytest.mark.parametrize("p", [2, 3])
def test_level2_and_torsor(p):
    assert verify_russell_level2(p)
    assert russell_level2_control(p)
    assert verify_torsor_action(p)
    assert torsor_action_control(p)


def test_relation_element_examples():
    f = russell_form(2, 1)
    a = f.base.param("alpha")
    assert cohomology_relation_element(f, 0, 0) == 0
    assert cohomology_relation_element(f, a, 0) == a**2
    assert cohomology_relation_element(f, 0, 1) == a - 1
    idx = cohomology_index(2, 1)
    assert idx.form.level == 1 and idx.alpha == a


def test_pth_powers():
    K = BaseField(2, ("t",))
    t = K.param("t")
    assert is_pth_power_ratfunc(t**2)
    assert not is_pth_power_ratfunc(t)
    f = (t**2 + t**4) / t**6
    assert is_pth_power_ratfunc(f, 2)
    r = pth_root_ratfunc(f)
    assert r**2 == f
    with pytest.raises(ValueError):
        pth_root_ratfunc(t)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_trivializing_witnesses(p):
    # alpha = t^p is a p-th power, so the class of every target is trivial
    K = BaseField(p, ("t",))
    t = K.param("t")
    form = russell_form(p, 1, alpha=t**p, base=K)
    targets = [c * t**i for i in range(-3, 6) for c in range(1, p)]
    targets += [t + 1, t * t + t, (t + 1) / t, 1 / (t + 1), t**3 + 1]
    found = 0
    for target in targets:
        w = find_trivializing_witness(form, target)
        assert w is not None, f"no witness for {target}"
        u, v = w
        assert cohomology_relation_element(form, u, v) == target
        found += 1
    assert found >= 14 and (p == 2 or found >= 20)


def test_witness_level2_unsupported():
    with pytest.raises(UnsupportedOperation):
        find_trivializing_witness(russell_form(2, 2), 1)
