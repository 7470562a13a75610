"""Russell forms ``U_{Phi,Psi} = ker((u, v) -> Phi(u) - Psi(v))`` and the
identities behind the twisted forms of the additive group for levels 1, 2.

Ring-valued checks run in triangular presentations over ``F_p(alpha)`` or
``F_p(alpha, beta)`` with ``x`` a free variable; each first asserts that the
ring is not the zero ring, and each has a deliberately broken twin that
must fail.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import _fpoly as fp
from .errors import UnsupportedOperation
from .exactalg import BaseField, FieldElem, RingElem, TriangularPresentation
from .ugroup import UnElement, un_mul


# ---------------------------------------------------------------------------
# additive polynomials


class AdditivePoly:
    """``sum c_i u^(p^i)`` with coefficients in a base field."""

    __slots__ = ("base", "coeffs")

    def __init__(self, base: BaseField, coeffs: Sequence):
        cs = [base.coerce(c) for c in coeffs]
        while cs and base.is_zero(cs[-1]):
            cs.pop()
        self.base = base
        self.coeffs = tuple(cs)

    @property
    def p(self) -> int:
        return self.base.p

    def dense(self) -> list:
        """Ordinary coefficient list, index = exponent."""
        if not self.coeffs:
            return []
        out = [self.base.zero] * (self.p ** (len(self.coeffs) - 1) + 1)
        for i, c in enumerate(self.coeffs):
            out[self.p**i] = c
        return out

    def __call__(self, x):
        """Evaluate at a field element or ring element (Frobenius iterated)."""
        acc = None
        w = x
        for i, c in enumerate(self.coeffs):
            if i:
                w = _frob(w, self.p)
            term = w * c if isinstance(w, RingElem) else c * w
            acc = term if acc is None else acc + term
        if acc is None:
            return x.pres.zero() if isinstance(x, RingElem) else self.base.zero
        return acc

    def __eq__(self, other):
        if not isinstance(other, AdditivePoly):
            return NotImplemented
        return self.base == other.base and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(len(self.coeffs))

    def to_str(self, var: str = "u") -> str:
        parts = []
        for i, c in enumerate(self.coeffs):
            if self.base.is_zero(c):
                continue
            mono = var if i == 0 else f"{var}^{self.p ** i}"
            if c == self.base.one:
                parts.append(mono)
            else:
                s = self.base.fmt(c)
                if not self.base.is_prime_field and (len(c.num) > 1 or not c.is_polynomial()):
                    s = f"({s})"
                parts.append(f"{s}*{mono}")
        return " + ".join(parts) if parts else "0"

    def __str__(self):
        return self.to_str()

    def __repr__(self):
        return f"AdditivePoly({self})"


def _frob(w, p):
    if isinstance(w, RingElem):
        return w.frobenius()
    if isinstance(w, FieldElem):
        return w.frobenius()
    return w**p


def _dense_trim(a: list, base: BaseField) -> list:
    a = list(a)
    while a and base.is_zero(a[-1]):
        a.pop()
    return a


def _dense_rem(a: list, b: list, base: BaseField) -> list:
    a = list(a)
    lead_inv = base.inv(b[-1])
    db = len(b) - 1
    while len(a) - 1 >= db and a:
        q = a[-1] * lead_inv
        shift = len(a) - 1 - db
        if not base.is_zero(q):
            for i, c in enumerate(b):
                if not base.is_zero(c):
                    a[shift + i] = a[shift + i] - q * c
                    if base.is_prime_field:
                        a[shift + i] %= base.p
        a = _dense_trim(a, base)
    return a


def additive_gcd(phi: AdditivePoly, psi: AdditivePoly) -> list:
    """Monic gcd of ``phi`` and ``psi`` as ordinary polynomials (dense list)."""
    if phi.base != psi.base:
        raise ValueError("additive polynomials over different fields")
    base = phi.base
    a, b = phi.dense(), psi.dense()
    if not a and not b:
        raise ValueError("gcd of two zero polynomials is undefined")
    while b:
        a, b = b, _dense_rem(a, b, base)
    inv = base.inv(a[-1])
    out = [c * inv for c in a]
    if base.is_prime_field:
        out = [c % base.p for c in out]
    else:
        out = [c.reduced() for c in out]
    return out


def is_additive_dense(poly: list, base: BaseField) -> bool:
    p = base.p
    for e, c in enumerate(poly):
        if base.is_zero(c):
            continue
        if e == 0:
            return False
        while e % p == 0:
            e //= p
        if e != 1:
            return False
    return True


def is_ga_twist(phi: AdditivePoly, psi: AdditivePoly) -> bool:
    g = additive_gcd(phi, psi)
    base = phi.base
    return len(g) == 2 and base.is_zero(g[0]) and g[1] == base.one


def dense_str(poly: list, base: BaseField, var: str = "u") -> str:
    parts = []
    for e in range(len(poly) - 1, -1, -1):
        c = poly[e]
        if base.is_zero(c):
            continue
        mono = "" if e == 0 else (var if e == 1 else f"{var}^{e}")
        s = base.fmt(c)
        if mono and c == base.one:
            parts.append(mono)
        elif mono:
            parts.append(f"({s})*{mono}" if " " in s else f"{s}*{mono}")
        else:
            parts.append(s)
    return " + ".join(parts) if parts else "0"


# ---------------------------------------------------------------------------
# Russell forms


@dataclass(frozen=True)
class RussellForm:
    p: int
    level: int
    base: BaseField
    alpha: object
    beta: object
    phi: AdditivePoly
    psi: AdditivePoly


def russell_form(p: int, level: int, alpha=None, beta=None, base: BaseField | None = None) -> RussellForm:
    """Level 1: ``(u^p, v - alpha v^p)``; level 2: ``(u^(p^2), v - alpha v^p - beta^p v^(p^2))``.

    By default ``alpha`` and ``beta`` are transcendental parameters.
    """
    if level not in (1, 2):
        raise UnsupportedOperation("only levels 1 and 2 have a known Russell form")
    if base is None:
        base = BaseField(p, ("alpha",) if level == 1 else ("alpha", "beta"))
    if alpha is None:
        alpha = base.param("alpha")
    alpha = base.coerce(alpha)
    one = base.one
    if level == 1:
        phi = AdditivePoly(base, [0, one])
        psi = AdditivePoly(base, [one, -alpha])
        return RussellForm(p, 1, base, alpha, None, phi, psi)
    if beta is None:
        beta = base.param("beta")
    beta = base.coerce(beta)
    phi = AdditivePoly(base, [0, 0, one])
    psi = AdditivePoly(base, [one, -alpha, -(beta**p)])
    return RussellForm(p, 2, base, alpha, beta, phi, psi)


@dataclass(frozen=True)
class CohomologyIndex:
    """Formal label ``(alpha mod K^(p^level), beta mod K^p)`` with its Russell form.

    A label is data only: equality of the classes it names is not decided.
    """

    p: int
    level: int
    alpha: object
    beta: object
    form: RussellForm


def cohomology_index(p: int, level: int, alpha=None, beta=None, base: BaseField | None = None) -> CohomologyIndex:
    form = russell_form(p, level, alpha, beta, base)
    return CohomologyIndex(p, level, form.alpha, form.beta, form)


def cohomology_relation_element(form: RussellForm, u, v):
    """``Phi(u) - Psi(v)``: its class in the cohomology set is trivial."""
    base = form.base
    u, v = base.coerce(u), base.coerce(v)
    r = form.phi(u) - form.psi(v)
    return r % base.p if base.is_prime_field else r


# ---------------------------------------------------------------------------
# p-th powers in F_p(t_1..t_m)


def is_pth_power_ratfunc(f, p: int | None = None) -> bool:
    """``f`` in ``K^p`` for ``K = F_p(params)``: ``num * den^(p-1)`` has all exponents divisible by ``p``."""
    if not isinstance(f, FieldElem):
        return True  # constants of F_p are p-th powers
    if p is not None and p != f.field.p:
        raise ValueError("characteristic mismatch")
    p = f.field.p
    g = fp.mul(f.num, fp.power(f.den, p - 1, p, f.field.nparams), p)
    return all(x % p == 0 for e in g for x in e)


def pth_root_ratfunc(f):
    """The ``p``-th root of a ``p``-th power in ``F_p(params)``."""
    if not isinstance(f, FieldElem):
        return f
    if not is_pth_power_ratfunc(f):
        raise ValueError(f"{f} is not a p-th power")
    p = f.field.p
    g = fp.mul(f.num, fp.power(f.den, p - 1, p, f.field.nparams), p)
    root = {tuple(x // p for x in e): c for e, c in g.items()}
    return FieldElem(f.field, root, f.den)


def find_trivializing_witness(form: RussellForm, target, max_shift: int = 2):
    """Search ``v`` in ``{c * target * t^j, c * t^j}`` for which ``target + Psi(v)``
    is a ``p``-th power ``u^p``; returns a verified ``(u, v)`` or ``None``.

    Only level 1 is searched (``Phi(u) = u^p``).
    """
    if form.level != 1:
        raise UnsupportedOperation("witness search is implemented for level 1")
    base = form.base
    target = base.coerce(target)
    monos = [base.one]
    for name in base.params:
        t = base.param(name)
        monos += [t**j for j in range(1, max_shift + 1)]
        monos += [t ** (-j) for j in range(1, max_shift + 1)]
    cands = []
    for c in range(1, base.p):
        for m in monos:
            cands.append(base.coerce(c) * target * m)
        for m in monos:
            cands.append(base.coerce(c) * m)
    cands.append(base.zero)
    for v in cands:
        w = target + form.psi(v)
        if is_pth_power_ratfunc(w):
            u = pth_root_ratfunc(w)
            if cohomology_relation_element(form, u, v) == target:
                return u, v
    return None


# ---------------------------------------------------------------------------
# symbolic verifications


def _assert_nonzero_ring(pres: TriangularPresentation):
    if pres.one().is_zero():
        raise AssertionError("ambient ring is the zero ring")


def level1_ring(p: int, with_relation: bool = True) -> TriangularPresentation:
    base = BaseField(p, ("alpha",))
    y_rel = (p, "alpha") if with_relation else None
    return TriangularPresentation(base, [("lam", p), ("y", y_rel), ("x", None)])


def level1_invariants(R: TriangularPresentation):
    p = R.base.p
    x, y = R.gen("x"), R.gen("y")
    xp = x.frobenius()
    return x - xp * y, xp


def verify_russell_level1(p: int) -> bool:
    """``u = x - x^p y`` and ``v = x^p`` are invariant under ``x -> x + lam x^p``,
    ``y -> y + lam``, and satisfy ``u^p = v - alpha v^p``."""
    R = level1_ring(p)
    _assert_nonzero_ring(R)
    lam, y, x = R.gens()
    sigma = {"x": x + lam * x.frobenius(), "y": y + lam}
    u, v = level1_invariants(R)
    alpha = R.const(R.base.param("alpha"))
    inv_u = u.substitute(sigma, check=True) == u
    inv_v = v.substitute(sigma, check=True) == v
    rel = u.frobenius() == v - alpha * v.frobenius()
    return inv_u and inv_v and rel


def russell_level1_control(p: int) -> bool:
    """Without ``y^p = alpha`` the relation must break; ``True`` when it does."""
    R = level1_ring(p, with_relation=False)
    _assert_nonzero_ring(R)
    u, v = level1_invariants(R)
    alpha = R.const(R.base.param("alpha"))
    return u.frobenius() - (v - alpha * v.frobenius()) != 0


def level2_ring(p: int) -> TriangularPresentation:
    base = BaseField(p, ("alpha", "beta"))
    return TriangularPresentation(base, [
        ("lam1", p * p),
        ("lam2", p),
        ("y", (p * p, "alpha")),
        ("z", (p, f"beta + alpha*y^{p}")),
        ("x", None),
    ])


def level2_invariants(R: TriangularPresentation, perturb: bool = False):
    p = R.base.p
    x, y, z = R.gen("x"), R.gen("y"), R.gen("z")
    xp = x.frobenius()
    xpp = xp.frobenius()
    u = x - xp * y - xpp * z + xpp * y ** (p + 1)
    if perturb:
        u = u + xpp * y
    return u, xpp


def _level2_sigma(R):
    lam1, lam2, y, z, x = R.gens()
    return {
        "x": x + lam1 * x.frobenius() + lam2 * x.frobenius(2),
        "y": y + lam1,
        "z": z + lam2 + lam1 * y.frobenius(),
    }


def verify_russell_level2(p: int) -> bool:
    """Invariance of ``u, v`` under the level-2 substitution and
    ``u^(p^2) = v - alpha v^p - beta^p v^(p^2)``."""
    R = level2_ring(p)
    _assert_nonzero_ring(R)
    sigma = _level2_sigma(R)
    u, v = level2_invariants(R)
    alpha = R.const(R.base.param("alpha"))
    beta_p = R.const(R.base.param("beta") ** p)
    inv_u = u.substitute(sigma, check=True) == u
    inv_v = v.substitute(sigma, check=True) == v
    rel = u.frobenius(2) == v - alpha * v.frobenius() - beta_p * v.frobenius(2)
    return inv_u and inv_v and rel


def russell_level2_control(p: int) -> bool:
    """Perturbing ``u`` by ``x^(p^2) y`` must break invariance; ``True`` when it does."""
    R = level2_ring(p)
    _assert_nonzero_ring(R)
    u, _ = level2_invariants(R, perturb=True)
    return u.substitute(_level2_sigma(R), check=True) != u


def torsor_ring(p: int) -> TriangularPresentation:
    base = BaseField(p, ("alpha", "beta"))
    return TriangularPresentation(base, [
        ("l1", p * p), ("l2", p), ("m1", p * p), ("m2", p),
        ("y", (p * p, "alpha")),
        ("z", (p, f"beta + alpha*y^{p}")),
    ])


def torsor_act(g: UnElement, point: tuple) -> tuple:
    """``(l1, l2) . (y, z) = (y + l1, z + l2 + l1 y^p)``."""
    y, z = point
    l1, l2 = g.coeffs
    return y + l1, z + l2 + l1 * y.frobenius()


def on_torsor(R: TriangularPresentation, point: tuple) -> bool:
    y, z = point
    p = R.base.p
    alpha = R.const(R.base.param("alpha"))
    beta = R.const(R.base.param("beta"))
    return y.frobenius(2) == alpha and z.frobenius() == beta + alpha * y.frobenius()


def verify_torsor_action(p: int) -> bool:
    """Closure, identity and compatibility with the ``U_2`` product."""
    R = torsor_ring(p)
    _assert_nonzero_ring(R)
    lam = UnElement.generic(R, 2, "l")
    mu = UnElement.generic(R, 2, "m")
    pt = (R.gen("y"), R.gen("z"))
    closure = on_torsor(R, pt) and on_torsor(R, torsor_act(lam, pt))
    ident = torsor_act(UnElement.identity(R, 2), pt) == pt
    compat = torsor_act(un_mul(lam, mu), pt) == torsor_act(lam, torsor_act(mu, pt))
    return closure and ident and compat


def torsor_action_control(p: int) -> bool:
    """The untwisted law ``(y + l1, z + l2)`` is not compatible; ``True`` when it fails."""
    R = torsor_ring(p)
    lam = UnElement.generic(R, 2, "l")
    mu = UnElement.generic(R, 2, "m")
    pt = (R.gen("y"), R.gen("z"))

    def naive(g, q):
        return q[0] + g.coeffs[0], q[1] + g.coeffs[1]

    return naive(un_mul(lam, mu), pt) != naive(lam, naive(mu, pt))
