"""The group schemes ``U_n`` and the semidirect product ``Ga x| U_n x| Gm``.

A point of ``U_n`` over ``R`` is ``1 + sum_{i=1}^n lam_i F^i`` with
``lam_i^(p^(n-i+1)) = 0``.  "Generic" points live in a universal ring
carrying one fresh variable per coordinate, with exactly its constraint
power as relation.

Composition convention: a :class:`GroupElement` ``g = (a, u, m)`` acts on
polynomials by the substitution ``x -> m * P_u(x) + a`` where
``P_u(x) = x + sum lam_i x^(p^i)``; this is a right action
``Q * g = Q(phi_g(x))``, and ``compose(g, h)`` is "act by g, then by h",
i.e. ``phi_{compose(g,h)} = phi_g o phi_h``.  Writing this out gives the
semidirect cocycle

    m = m_g m_h,  u = u_g^{m_h} * u_h,  a = m_g P_g(a_h) + a_g

where ``u^{m}`` has coordinates ``lam_i m^(p^i - 1)``.
"""

from __future__ import annotations

import math
from typing import Sequence

from .errors import (
    ConsistencyError,
    OutOfDomain,
    PresentationMismatch,
    ResourceBudgetExceeded,
)
from .exactalg import BaseField, RingElem, TriangularPresentation
from .report import Report
from .skewpoly import SkewPoly, skew_inverse, skew_mul

DEFAULT_MAX_RANK = 10**6


def constraint_exponent(p: int, n: int, i: int) -> int:
    """``lam_i^(p^(n-i+1)) = 0`` on ``U_n``."""
    return p ** (n - i + 1)


def un_order(p: int, n: int) -> int:
    return p ** (n * (n + 1) // 2)


def universal_ring(p: int, n: int, points: Sequence[str] = ("l",), extra: Sequence = (),
                   max_rank: int = DEFAULT_MAX_RANK) -> TriangularPresentation:
    """``F_p`` adjoined one generic ``U_n`` point per prefix in ``points``.

    Point ``"l"`` gets variables ``l1..ln``.  ``extra`` appends further
    ``(name, relation)`` pairs.
    """
    variables = []
    for prefix in points:
        for i in range(1, n + 1):
            variables.append((f"{prefix}{i}", constraint_exponent(p, n, i)))
    variables.extend(extra)
    rank = 1
    for _, rel in variables:
        if rel is None:
            rank = math.inf
            break
        rank *= rel if isinstance(rel, int) else rel[0]
    if rank > max_rank:
        raise ResourceBudgetExceeded(f"universal ring rank {rank} exceeds budget {max_rank}")
    return TriangularPresentation(BaseField(p), variables)


class UnElement:
    """Point ``1 + sum lam_i F^i`` of ``U_n(R)``."""

    __slots__ = ("n", "coeffs", "ring")

    def __init__(self, ring: TriangularPresentation, coeffs: Sequence, check: bool = True):
        cs = tuple(c if isinstance(c, RingElem) else ring.const(c) for c in coeffs)
        for c in cs:
            if c.pres is not ring and c.pres != ring:
                raise PresentationMismatch("coordinate from a different ring")
        self.ring = ring
        self.n = len(cs)
        self.coeffs = cs
        if check:
            bad = violated_constraint(self)
            if bad is not None:
                raise OutOfDomain(f"lam_{bad}^(p^{self.n - bad + 1}) != 0")

    @classmethod
    def identity(cls, ring, n: int) -> "UnElement":
        return cls(ring, [ring.zero()] * n, check=False)

    @classmethod
    def generic(cls, ring, n: int, prefix: str = "l") -> "UnElement":
        return cls(ring, [ring.gen(f"{prefix}{i}") for i in range(1, n + 1)], check=False)

    @property
    def p(self) -> int:
        return self.ring.base.p

    def to_skew(self) -> SkewPoly:
        return SkewPoly(self.ring, [self.ring.one(), *self.coeffs])

    def lam(self, i: int) -> RingElem:
        """``lam_i`` with ``lam_0 = 1``."""
        return self.ring.one() if i == 0 else self.coeffs[i - 1]

    def __mul__(self, other):
        return un_mul(self, other)

    def __eq__(self, other):
        if not isinstance(other, UnElement):
            return NotImplemented
        return self.n == other.n and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"UnElement({', '.join(str(c) for c in self.coeffs)})"


def violated_constraint(x: UnElement):
    """Index of the first violated ``U_n`` constraint, or ``None``."""
    for i, c in enumerate(x.coeffs, start=1):
        if c and c.frobenius(x.n - i + 1):
            return i
    return None


def _from_skew(s: SkewPoly, n: int, what: str) -> UnElement:
    if s.coeff(0) != 1:
        raise ConsistencyError(f"{what}: constant coefficient is not 1")
    if s.degree > n:
        raise ConsistencyError(f"{what}: coefficient of F^{s.degree} beyond level {n}")
    x = UnElement(s.ring, [s.coeff(i) for i in range(1, n + 1)], check=False)
    bad = violated_constraint(x)
    if bad is not None:
        raise ConsistencyError(f"{what}: constraint on lam_{bad} fails")
    return x


def _same(x: UnElement, y: UnElement):
    if x.n != y.n:
        raise PresentationMismatch("elements of different levels")
    if x.ring is not y.ring and x.ring != y.ring:
        raise PresentationMismatch("elements over different rings")


def un_mul(x: UnElement, y: UnElement) -> UnElement:
    _same(x, y)
    return _from_skew(skew_mul(x.to_skew(), y.to_skew()), x.n, "product")


def un_inverse(x: UnElement) -> UnElement:
    return _from_skew(skew_inverse(x.to_skew()), x.n, "inverse")


def un_commutator(x: UnElement, y: UnElement) -> UnElement:
    """``(xy)(yx)^-1``, which equals ``x y x^-1 y^-1``."""
    return un_mul(un_mul(x, y), un_inverse(un_mul(y, x)))


def frobenius_map(x: UnElement) -> UnElement:
    """``(lam_1^p, ..., lam_{n-1}^p)`` in ``U_{n-1}``; asserts ``lam_n^p = 0``."""
    if x.n < 1:
        raise OutOfDomain("frobenius_map needs level >= 1")
    imgs = [c.frobenius() for c in x.coeffs]
    if imgs[-1]:
        raise ConsistencyError("lam_n^p does not vanish")
    return UnElement(x.ring, imgs[:-1], check=True)


def adjoint_matrix(x: UnElement) -> list:
    """Matrix of ``Ad(P^-1)``: column ``s`` is ``sum_{r>=s} lam_{r-s}^(p^s) e_r``.

    Rows and columns are indexed ``1..n`` (stored 0-based).
    """
    n = x.n
    ring = x.ring
    rows = []
    for r in range(1, n + 1):
        row = []
        for s in range(1, n + 1):
            row.append(x.lam(r - s).frobenius(s) if r >= s else ring.zero())
        rows.append(row)
    return rows


def adjoint_by_conjugation(x: UnElement, eps: str = "eps") -> list:
    """Oracle for :func:`adjoint_matrix`: conjugate ``1 + eps F^s`` by ``P^-1``.

    Works in the ring extended by ``eps`` with ``eps^2 = 0`` (so also
    ``F eps = eps^p F = 0``) and reads off the ``eps``-linear coefficients
    of ``P^-1 (1 + eps F^s) P``.
    """
    n = x.n
    ext = x.ring.extend([(eps, 2)])
    e = ext.gen(eps)
    ei = ext.index(eps)
    P = SkewPoly(ext, [ext.one(), *(c.lift(ext) for c in x.coeffs)])
    Pinv = skew_inverse(P)
    cols = []
    for s in range(1, n + 1):
        unit = SkewPoly(ext, [ext.one()] + [ext.zero()] * (s - 1) + [e])
        conj = skew_mul(skew_mul(Pinv, unit), P)
        if conj.coeff(0) != 1:
            raise ConsistencyError("conjugate lost its constant term")
        col = []
        for r in range(1, conj.degree + 1):
            c = conj.coeff(r)
            lin = {}
            for exps, v in c.monomials():
                if exps[ei] != 1:
                    raise ConsistencyError("conjugate has an eps-free higher term")
                lin[exps[:ei]] = v
            if r > n:
                if lin:
                    raise ConsistencyError(f"conjugate has a term at F^{r} beyond level {n}")
                continue
            col.append(x.ring._from_raw(lin))
        col += [x.ring.zero()] * (n - len(col))
        cols.append(col)
    return [list(r) for r in zip(*cols)]


def central_member(x: UnElement, r: int) -> bool:
    """Membership in ``G_r = {lam_i = 0 for 1 <= i <= n - r}``."""
    if not 0 <= r <= x.n:
        raise OutOfDomain(f"r must lie in [0, {x.n}]")
    return all(not x.coeffs[i - 1] for i in range(1, x.n - r + 1))


def generic_in_level(ring, n: int, r: int, prefix: str) -> UnElement:
    """Generic point of ``G_r``: coordinates ``1..n-r`` zero, the rest fresh."""
    cs = [ring.zero() if i <= n - r else ring.gen(f"{prefix}{i}") for i in range(1, n + 1)]
    return UnElement(ring, cs, check=False)


def level_rank(p: int, n: int, r: int) -> int:
    """Rank of the coordinate ring of ``G_r``, i.e. its order."""
    return math.prod(constraint_exponent(p, n, i) for i in range(n - r + 1, n + 1))


def verify_central_series(p: int, n: int, max_rank: int = DEFAULT_MAX_RANK) -> Report:
    """Check that ``G_r`` is the upper central series of ``U_n``.

    For each ``1 <= r <= n``: generic ``x`` in ``G_r`` and generic ``y``
    give a commutator in ``G_{r-1}`` (containment).  For ``1 <= r <= n-1``:
    generic ``x`` in ``G_{r+1}`` gives a commutator outside ``G_{r-1}``, so
    ``G_{r+1}`` is not central modulo ``G_{r-1}`` (strictness).  Also checks
    ``|G_r| / |G_{r-1}| = p^r``.
    """
    report = Report("central")
    ring = universal_ring(p, n, ("l", "m"), max_rank=max_rank)
    y = UnElement.generic(ring, n, "m")
    cell = {"p": p, "n": n}
    for r in range(1, n + 1):
        with report.timed({**cell, "r": r}, "commutator in G_{r-1}") as box:
            x = generic_in_level(ring, n, r, "l")
            c = un_commutator(x, y)
            box["passed"] = central_member(c, r - 1)
            if not box["passed"]:
                box["detail"] = f"commutator {c}"
        if r <= n - 1:
            with report.timed({**cell, "r": r}, "strict: G_{r+1} not central") as box:
                x = generic_in_level(ring, n, r + 1, "l")
                c = un_commutator(x, y)
                box["passed"] = not central_member(c, r - 1)
                idx = next((i for i in range(1, n - r + 2) if c.coeffs[i - 1]), None)
                box["detail"] = f"lam_{idx} != 0" if idx else "commutator lies in G_{r-1}"
        with report.timed({**cell, "r": r}, "order |G_r|/|G_{r-1}| = p^r") as box:
            q = level_rank(p, n, r) // level_rank(p, n, r - 1)
            box["passed"] = q == p**r
            box["detail"] = f"{q}"
    return report


def commutator_formula_check(p: int, n: int, s: int, max_rank: int = DEFAULT_MAX_RANK) -> bool:
    """``a b a^-1 b^-1 = 1 + (alpha beta^p - beta alpha^(p^s)) F^(s+1) + O(F^(s+2))``.

    Here ``a = 1 - alpha F`` and ``b = 1 - beta F^s - gamma F^(s+1)`` with
    ``alpha, beta, gamma`` generic subject to the ``U_n`` constraints of
    their positions.
    """
    if not 1 <= s <= n - 1:
        raise OutOfDomain(f"s must lie in [1, {n - 1}]")
    ring = universal_ring(p, n, (), extra=[
        ("alpha", constraint_exponent(p, n, 1)),
        ("beta", constraint_exponent(p, n, s)),
        ("gamma", constraint_exponent(p, n, s + 1)),
    ], max_rank=max_rank)
    al, be, ga = ring.gens()
    one, zero = ring.one(), ring.zero()
    a = SkewPoly(ring, [one, -al])
    b = SkewPoly(ring, [one] + [zero] * (s - 1) + [-be, -ga])
    c = skew_mul(skew_mul(a, b), skew_mul(skew_inverse(a), skew_inverse(b)))
    if c.coeff(0) != 1 or any(c.coeff(i) for i in range(1, s + 1)):
        return False
    return c.coeff(s + 1) == al * be.frobenius() - be * al.frobenius(s)


# ---------------------------------------------------------------------------
# Ga x| U_n x| Gm


class GroupElement:
    """``x -> m * P_u(x) + a``; see the module docstring for the convention."""

    __slots__ = ("a", "u", "m")

    def __init__(self, a: RingElem, u: UnElement, m: RingElem):
        ring = u.ring
        a = a if isinstance(a, RingElem) else ring.const(a)
        m = m if isinstance(m, RingElem) else ring.const(m)
        if a.pres != ring or m.pres != ring:
            raise PresentationMismatch("parts of a group element over different rings")
        self.a = a
        self.u = u
        self.m = m

    @classmethod
    def identity(cls, ring, n: int) -> "GroupElement":
        return cls(ring.zero(), UnElement.identity(ring, n), ring.one())

    @classmethod
    def translation(cls, alpha: RingElem, n: int) -> "GroupElement":
        ring = alpha.pres
        return cls(alpha, UnElement.identity(ring, n), ring.one())

    @classmethod
    def scaling(cls, mu: RingElem, n: int) -> "GroupElement":
        ring = mu.pres
        return cls(ring.zero(), UnElement.identity(ring, n), mu)

    @classmethod
    def unipotent(cls, u: UnElement) -> "GroupElement":
        return cls(u.ring.zero(), u, u.ring.one())

    @property
    def ring(self):
        return self.u.ring

    def image_of_x(self) -> list:
        """Dense coefficient list of ``phi_g(x)``."""
        p = self.ring.base.p
        deg = p ** self.u.n if self.u.n else 1
        out = [self.ring.zero() for _ in range(deg + 1)]
        out[0] = self.a
        out[1] = self.m
        for i, lam in enumerate(self.u.coeffs, start=1):
            out[p**i] = out[p**i] + self.m * lam
        return _trim(out)

    def __eq__(self, other):
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self.a == other.a and self.u == other.u and self.m == other.m

    def __hash__(self):
        return hash((self.a, self.u, self.m))

    def __repr__(self):
        return f"GroupElement(a={self.a}, u={self.u}, m={self.m})"


def _twist(u: UnElement, m: RingElem) -> UnElement:
    """Coordinates ``lam_i m^(p^i - 1)``: ``P_u(m y) = m P_{u^m}(y)``."""
    cs = []
    pw = m.pres.one()
    mi = m
    for lam in u.coeffs:
        # m^(p^i - 1) = m^(p^(i-1) - 1) * m^(p^(i-1) (p - 1))
        pw = pw * mi ** (u.p - 1)
        mi = mi.frobenius()
        cs.append(lam * pw)
    return UnElement(u.ring, cs, check=False)


def _apply_additive(u: UnElement, v: RingElem) -> RingElem:
    """``P_u(v) = v + sum lam_i v^(p^i)``."""
    acc = v
    w = v
    for lam in u.coeffs:
        w = w.frobenius()
        acc = acc + lam * w
    return acc


def compose(g: GroupElement, h: GroupElement) -> GroupElement:
    """Act by ``g``, then by ``h``: ``phi = phi_g o phi_h``."""
    if g.ring != h.ring:
        raise PresentationMismatch("group elements over different rings")
    if g.u.n != h.u.n:
        raise PresentationMismatch("group elements of different levels")
    m = g.m * h.m
    u = un_mul(_twist(g.u, h.m), h.u)
    a = g.m * _apply_additive(g.u, h.a) + g.a
    return GroupElement(a, u, m)


def group_inverse(g: GroupElement) -> GroupElement:
    mi = g.m.inverse()
    ui = _twist(un_inverse(g.u), mi)
    a = -(mi * _apply_additive(ui, g.a))
    return GroupElement(a, ui, mi)


def _trim(c: list) -> list:
    while c and not c[-1]:
        c.pop()
    return c


def poly_mul(a: list, b: list) -> list:
    if not a or not b:
        return []
    ring = a[0].pres
    out = [ring.zero() for _ in range(len(a) + len(b) - 1)]
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b):
            if y:
                out[i + j] = out[i + j] + x * y
    return _trim(out)


def poly_add(a: list, b: list) -> list:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, y in enumerate(b):
        out[i] = out[i] + y
    return _trim(out)


def act_on_polynomial(g: GroupElement, q: Sequence) -> list:
    """``Q * g = Q(m P_u(x) + a)`` for ``Q`` a dense list of coefficients in ``x``."""
    ring = g.ring
    q = [c if isinstance(c, RingElem) else ring.const(c) for c in q]
    phi = g.image_of_x()
    out: list = []
    for c in reversed(q):
        out = poly_add(poly_mul(out, phi), [c] if c else [])
    return out
