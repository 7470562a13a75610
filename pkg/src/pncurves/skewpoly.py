"""The skew polynomial ring ``R[F; sigma]`` with ``F*lam = lam^p * F``.

A :class:`SkewPoly` ``sum lam_i F^i`` is the same thing as the additive
polynomial ``sum lam_i x^(p^i)``; multiplication is composition
``(a*b)(x) = a(b(x))``.  ``str`` prints the ``F`` form, :meth:`SkewPoly.additive_str`
the ``x`` form.
"""

from __future__ import annotations

from typing import Sequence

from .errors import (
    ConsistencyError,
    NotInvertible,
    OutOfDomain,
    PresentationMismatch,
    UnsupportedOperation,
)
from .exactalg import (
    RingElem,
    TriangularPresentation,
    format_elem,
    is_nilpotent,
    is_unit,
    normal_form,
)


class SkewPoly:
    __slots__ = ("ring", "coeffs")

    def __init__(self, ring: TriangularPresentation, coeffs: Sequence):
        cs = [c if isinstance(c, RingElem) else ring.const(c) for c in coeffs]
        for c in cs:
            if c.pres is not ring and c.pres != ring:
                raise PresentationMismatch("coefficient from a different ring")
        while cs and not cs[-1]:
            cs.pop()
        self.ring = ring
        self.coeffs = tuple(cs)

    @classmethod
    def one(cls, ring) -> "SkewPoly":
        return cls(ring, [ring.one()])

    @classmethod
    def frobenius_gen(cls, ring) -> "SkewPoly":
        return cls(ring, [ring.zero(), ring.one()])

    @property
    def p(self) -> int:
        return self.ring.base.p

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, i: int) -> RingElem:
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return self.ring.zero()

    def _check(self, other: "SkewPoly"):
        if not isinstance(other, SkewPoly):
            raise TypeError("expected a SkewPoly")
        if other.ring is not self.ring and other.ring != self.ring:
            raise PresentationMismatch("skew polynomials over different rings")

    def __add__(self, other):
        self._check(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return SkewPoly(self.ring, [self.coeff(i) + other.coeff(i) for i in range(n)])

    def __neg__(self):
        return SkewPoly(self.ring, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        return skew_mul(self, other)

    def __pow__(self, k: int):
        if k < 0:
            return skew_inverse(self) ** (-k)
        result = SkewPoly.one(self.ring)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, SkewPoly):
            return NotImplemented
        return self.ring == other.ring and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __str__(self):
        return _format(self, lambda i: "" if i == 0 else ("F" if i == 1 else f"F^{i}"))

    def additive_str(self, var: str = "x") -> str:
        p = self.p
        return _format(self, lambda i: var if i == 0 else f"{var}^{p ** i}")

    def __repr__(self):
        return f"SkewPoly({self})"


def _format(a: SkewPoly, mono) -> str:
    parts = []
    for i, c in enumerate(a.coeffs):
        if not c:
            continue
        m = mono(i)
        s = format_elem(c)
        if not m:
            parts.append(s)
        elif c == 1:
            parts.append(m)
        else:
            if len(c.terms) > 1:
                s = f"({s})"
            parts.append(f"{s}*{m}")
    return " + ".join(parts) if parts else "0"


def parse_skew(text: str, ring: TriangularPresentation, var: str = "F") -> SkewPoly:
    """Parse ``sum c_i * F^i`` with every coefficient written left of ``F``."""
    if var in ring.names:
        raise PresentationMismatch(f"{var!r} is already a ring variable")
    ext = ring.extend([(var, None)])
    elem = normal_form(text, ext)
    fi = ext.index(var)
    coeffs: dict = {}
    for exps, c in elem.monomials():
        i = exps[fi]
        coeffs.setdefault(i, {})[exps[:fi]] = c
    deg = max(coeffs) if coeffs else -1
    return SkewPoly(ring, [ring._from_raw(coeffs.get(i, {})) for i in range(deg + 1)])


def skew_mul(a: SkewPoly, b: SkewPoly) -> SkewPoly:
    """``c_k = sum_{i+j=k} lam_i * mu_j^(p^i)``."""
    a._check(b)
    ring = a.ring
    if not a.coeffs or not b.coeffs:
        return SkewPoly(ring, [])
    out = [ring.zero() for _ in range(a.degree + b.degree + 1)]
    for j, mu in enumerate(b.coeffs):
        if not mu:
            continue
        twisted = mu
        for i, lam in enumerate(a.coeffs):
            if i:
                twisted = twisted.frobenius()
            if lam and twisted:
                out[i + j] = out[i + j] + lam * twisted
    return SkewPoly(ring, out)


def _require_finite(ring: TriangularPresentation):
    if not ring.is_finite:
        raise UnsupportedOperation("coefficient ring must have finite rank")


def is_nilpotent_skew(a: SkewPoly) -> bool:
    _require_finite(a.ring)
    return all(is_nilpotent(c) for c in a.coeffs)


def is_unit_skew(a: SkewPoly) -> bool:
    _require_finite(a.ring)
    if not a.coeffs or not is_unit(a.coeff(0)):
        return False
    return all(is_nilpotent(c) for c in a.coeffs[1:])


def skew_inverse(a: SkewPoly, check: bool = True) -> SkewPoly:
    """Two-sided inverse by the recursion ``mu_k = -lam_0^-1 sum lam_i mu_{k-i}^(p^i)``.

    ``mu_k`` depends only on the previous ``deg a`` values, so ``deg a``
    consecutive zeros end the recursion for good.  The degree of the result
    is asserted to respect the nilpotency bound.
    """
    ring = a.ring
    if not a.coeffs:
        raise NotInvertible("zero is not invertible")
    lam0 = a.coeffs[0]
    try:
        inv0 = lam0.inverse()
    except NotInvertible:
        raise NotInvertible("constant coefficient is not a unit") from None
    n = a.degree
    if n == 0:
        return SkewPoly(ring, [inv0])
    bound = _inverse_degree_bound(a)
    mus = [inv0]
    zeros = 0
    k = 0
    while zeros < n:
        k += 1
        # the last nonzero mu is at most `bound`; the zero run that certifies it follows
        if k > bound + n:
            raise NotInvertible("recursion does not terminate within the nilpotency bound")
        acc = ring.zero()
        for i in range(1, min(k, n) + 1):
            lam = a.coeffs[i]
            if lam:
                m = mus[k - i]
                if m:
                    acc = acc + lam * m.frobenius(i)
        mu = -(inv0 * acc)
        mus.append(mu)
        zeros = zeros + 1 if not mu else 0
    result = SkewPoly(ring, mus)
    if result.degree > bound:
        raise ConsistencyError(f"inverse degree {result.degree} exceeds the bound {bound}")
    if check:
        one = SkewPoly.one(ring)
        if skew_mul(a, result) != one or skew_mul(result, a) != one:
            raise ConsistencyError("skew inverse failed its product check")
    return result


def _inverse_degree_bound(a: SkewPoly) -> int:
    # the coefficients of (tail)^k lie in I^k for the ideal I of the tail,
    # and I^N = 0 for the nilpotency bound N of the ring
    ring = a.ring
    try:
        nil = ring.nilpotency_bound()
    except Exception:
        nil = None
    if nil is None:
        raise UnsupportedOperation("no nilpotency bound for this coefficient ring")
    return max(1, (nil - 1) * a.degree)


def matrix_rep(a: SkewPoly, d: int) -> list:
    """Truncated upper triangular matrix with entry ``(r, s) = lam_{s-r}^(p^r)``."""
    if d < 1:
        raise ValueError("matrix size must be positive")
    ring = a.ring
    rows = []
    for r in range(d):
        row = []
        for s in range(d):
            if s < r:
                row.append(ring.zero())
            else:
                row.append(a.coeff(s - r).frobenius(r))
        rows.append(row)
    return rows


def matmul(x: list, y: list) -> list:
    n = len(x)
    ring = x[0][0].pres
    out = []
    for r in range(n):
        row = []
        for s in range(len(y[0])):
            acc = ring.zero()
            for k in range(len(y)):
                if x[r][k] and y[k][s]:
                    acc = acc + x[r][k] * y[k][s]
            row.append(acc)
        out.append(row)
    return out


def fil_level(a: SkewPoly):
    """Least ``i >= 1`` with ``lam_i != 0``; ``math.inf`` for ``a = 1``."""
    if a.coeff(0) != 1:
        raise OutOfDomain("fil_level needs constant coefficient 1")
    for i in range(1, len(a.coeffs)):
        if a.coeffs[i]:
            return i
    return float("inf")


def split_unit(a: SkewPoly) -> tuple:
    """``a = f * lam_0`` with ``f`` in ``Fil^1``: ``f = 1 + sum lam_i lam_0^(-p^i) F^i``."""
    lam0 = a.coeff(0)
    inv0 = lam0.inverse()
    coeffs = [a.ring.one()]
    pw = inv0
    for i in range(1, len(a.coeffs)):
        pw = pw.frobenius()
        coeffs.append(a.coeffs[i] * pw)
    return SkewPoly(a.ring, coeffs), lam0


def conjugate_by_unit(a: SkewPoly, mu: RingElem) -> SkewPoly:
    """``mu * a * mu^-1``, whose coefficients are ``mu^(1-p^i) lam_i``."""
    m = SkewPoly(a.ring, [mu])
    return skew_mul(skew_mul(m, a), SkewPoly(a.ring, [mu.inverse()]))


def commutator(x: SkewPoly, y: SkewPoly) -> SkewPoly:
    return x * y * skew_inverse(x) * skew_inverse(y)
