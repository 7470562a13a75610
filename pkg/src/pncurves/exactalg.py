"""Exact arithmetic: prime fields, rational function fields over them, and
triangular quotient rings.

A :class:`TriangularPresentation` is a list of variables ``v_1, ..., v_k``
where each variable is either free or subject to ``v_i^{d_i} = g_i`` with
``g_i`` a polynomial in strictly earlier variables.  Rewriting
``v_i^{d_i} -> g_i`` from the last variable down to the first is confluent,
so every element has a unique normal form with ``e_i < d_i``.

Monomials are packed into a single Python integer.  Variable ``v_1``
occupies the most significant bit field, so integer order on packed keys is
lexicographic order on exponent vectors, and multiplying monomials is
integer addition.  Each bounded variable carries one guard bit; adding a
per-field bias before masking detects ``e_i >= d_i`` for all variables with
a single ``&``.

Prime-field coefficients are plain ``int`` in ``range(p)``; coefficients in
``F_p(t_1, ..., t_m)`` are :class:`FieldElem`.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _fpoly as fp
from . import kernels
from .errors import (
    NotInvertible,
    PresentationMismatch,
    UndecidableHere,
    UnsupportedOperation,
)

FREE_BITS = 24
# fractions whose numerator and denominator together exceed this many terms
# get a full multivariate gcd reduction
GCD_TERM_THRESHOLD = 24
KERNEL_MIN_PAIRS = 4096
KERNEL_MAX_RANK = 1 << 22


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


# ---------------------------------------------------------------------------
# base fields


@dataclass(frozen=True)
class BaseField:
    """``F_p`` when ``params`` is empty, else ``F_p(params)``."""

    p: int
    params: tuple = ()

    def __post_init__(self):
        if not isinstance(self.p, int) or not is_prime(self.p):
            raise ValueError(f"characteristic must be prime, got {self.p!r}")
        object.__setattr__(self, "params", tuple(self.params))
        for name in self.params:
            if not _IDENT.fullmatch(name):
                raise ValueError(f"bad parameter name {name!r}")
        if len(set(self.params)) != len(self.params):
            raise ValueError("duplicate parameter names")

    @property
    def is_prime_field(self) -> bool:
        return not self.params

    @property
    def nparams(self) -> int:
        return len(self.params)

    @property
    def zero(self):
        return 0 if self.is_prime_field else FieldElem(self, {}, None)

    @property
    def one(self):
        return 1 if self.is_prime_field else FieldElem(self, fp.const(1, self.nparams, self.p), None)

    def param(self, name: str) -> "FieldElem":
        i = self.params.index(name)
        return FieldElem(self, fp.gen(i, self.nparams), None)

    def coerce(self, x):
        if isinstance(x, FieldElem):
            if x.field != self:
                raise PresentationMismatch("coefficient from a different field")
            return x
        if isinstance(x, (int, np.integer)):
            x = int(x) % self.p
            if self.is_prime_field:
                return x
            return FieldElem(self, fp.const(x, self.nparams, self.p), None)
        raise TypeError(f"cannot coerce {type(x).__name__} into {self}")

    def is_zero(self, c) -> bool:
        if self.is_prime_field:
            return c % self.p == 0
        return not c.num

    def inv(self, c):
        if self.is_zero(c):
            raise NotInvertible("zero has no inverse")
        if self.is_prime_field:
            return pow(c, self.p - 2, self.p)
        return c.inverse()

    def frob(self, c):
        if self.is_prime_field:
            return c
        return c.frobenius()

    def fmt(self, c) -> str:
        if self.is_prime_field:
            return str(c % self.p)
        return str(c)

    def __str__(self):
        if self.is_prime_field:
            return f"F_{self.p}"
        return f"F_{self.p}({', '.join(self.params)})"


class FieldElem:
    """A fraction ``num/den`` of polynomials over ``F_p`` in the parameters.

    Fractions are kept only partially reduced: common monomial factors and
    exact divisions are removed eagerly, a full gcd only past
    ``GCD_TERM_THRESHOLD`` terms (always, for a single parameter).
    Equality is decided by cross-multiplication.
    """

    __slots__ = ("field", "num", "den")

    def __init__(self, field: BaseField, num: dict, den: dict | None):
        if den is None:
            den = fp.const(1, field.nparams, field.p)
        num, den = _normalize_fraction(field, num, den)
        self.field = field
        self.num = num
        self.den = den

    @classmethod
    def _raw(cls, field, num, den):
        obj = cls.__new__(cls)
        obj.field = field
        obj.num = num
        obj.den = den
        return obj

    def _coerce(self, other):
        if isinstance(other, FieldElem):
            if other.field != self.field:
                raise PresentationMismatch("fractions from different fields")
            return other
        if isinstance(other, (int, np.integer)):
            return FieldElem._raw(self.field, fp.const(int(other), self.field.nparams, self.field.p),
                                  fp.const(1, self.field.nparams, self.field.p))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = self.field.p
        if not other.num:
            return self
        if not self.num:
            return other
        if self.den == other.den:
            return FieldElem(self.field, fp.add(self.num, other.num, p), self.den)
        num = fp.add(fp.mul(self.num, other.den, p), fp.mul(other.num, self.den, p), p)
        return FieldElem(self.field, num, fp.mul(self.den, other.den, p))

    __radd__ = __add__

    def __neg__(self):
        return FieldElem._raw(self.field, fp.neg(self.num, self.field.p), self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = self.field.p
        if not self.num or not other.num:
            return FieldElem._raw(self.field, {}, fp.const(1, self.field.nparams, p))
        return FieldElem(self.field, fp.mul(self.num, other.num, p), fp.mul(self.den, other.den, p))

    __rmul__ = __mul__

    def inverse(self) -> "FieldElem":
        if not self.num:
            raise NotInvertible("zero has no inverse")
        return FieldElem(self.field, self.den, self.num)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, k: int):
        p, m = self.field.p, self.field.nparams
        if k < 0:
            return self.inverse() ** (-k)
        return FieldElem(self.field, fp.power(self.num, k, p, m), fp.power(self.den, k, p, m))

    def frobenius(self) -> "FieldElem":
        p = self.field.p
        return FieldElem._raw(self.field, fp.frobenius(self.num, p), fp.frobenius(self.den, p))

    def is_zero(self) -> bool:
        return not self.num

    def __bool__(self):
        return bool(self.num)

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = self.field.p
        return fp.mul(self.num, other.den, p) == fp.mul(other.num, self.den, p)

    def __hash__(self):
        # equal fractions a/b = c/d satisfy deg a - deg b = deg c - deg d
        if not self.num:
            return hash(0)
        if self.den == fp.const(1, self.field.nparams, self.field.p) and len(self.num) == 1:
            (e, c), = self.num.items()
            if not any(e):
                return hash(c)
        return hash(("frac", fp.total_degree(self.num) - fp.total_degree(self.den)))

    def reduced(self) -> "FieldElem":
        """Fully gcd-reduced copy (uses sympy for several parameters)."""
        num, den = _gcd_reduce(self.field, self.num, self.den)
        return FieldElem._raw(self.field, num, den)

    def is_polynomial(self) -> bool:
        return not any(any(e) for e in self.den)

    def __str__(self):
        names = self.field.params
        n = fp.to_str(self.num, names)
        if self.is_polynomial() and self.den == fp.const(1, self.field.nparams, self.field.p):
            return n
        return f"({n})/({fp.to_str(self.den, names)})"

    def __repr__(self):
        return f"FieldElem({self})"


def _normalize_fraction(field, num, den):
    p, m = field.p, field.nparams
    if not den:
        raise ZeroDivisionError("zero denominator")
    if not num:
        return {}, fp.const(1, m, p)
    g = tuple(min(x, y) for x, y in zip(fp.monomial_content(num), fp.monomial_content(den)))
    if any(g):
        num = fp.shift_down(num, g)
        den = fp.shift_down(den, g)
    if len(den) > 1 or any(any(e) for e in den):
        if m == 1:
            num, den = _gcd_reduce(field, num, den)
        else:
            q = fp.divexact(num, den, p)
            if q is not None:
                num, den = q, fp.const(1, m, p)
            elif len(num) + len(den) > GCD_TERM_THRESHOLD:
                num, den = _gcd_reduce(field, num, den)
    _, lc = fp.leading(den)
    if lc != 1:
        inv = pow(lc, p - 2, p)
        num = fp.scale(num, inv, p)
        den = fp.scale(den, inv, p)
    return num, den


def _gcd_reduce(field, num, den):
    p, m = field.p, field.nparams
    if not num:
        return {}, fp.const(1, m, p)
    if m == 1:
        g = fp.univariate_gcd(num, den, p)
    else:
        g = _sympy_gcd(field, num, den)
    if len(g) > 1 or any(any(e) for e in g):
        num = fp.divexact(num, g, p)
        den = fp.divexact(den, g, p)
    _, lc = fp.leading(den)
    inv = pow(lc, p - 2, p)
    return fp.scale(num, inv, p), fp.scale(den, inv, p)


def _sympy_gcd(field, a, b):
    import sympy

    gens = sympy.symbols(list(field.params)) if field.params else []
    # from_dict converts the values of its argument in place
    pa = sympy.Poly.from_dict(dict(a), *gens, modulus=field.p)
    pb = sympy.Poly.from_dict(dict(b), *gens, modulus=field.p)
    g = pa.gcd(pb)
    return {tuple(int(x) for x in e): int(c) % field.p for e, c in g.as_dict().items() if int(c) % field.p}


# ---------------------------------------------------------------------------
# parsing


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(.))")


def _tokenize(text: str):
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # pragma: no cover - regex matches any char
            break
        num, ident, op = m.groups()
        if num is not None:
            out.append(("num", int(num)))
        elif ident is not None:
            out.append(("id", ident))
        else:
            if op not in "+-*/^()":
                raise ValueError(f"unexpected character {op!r} in {text!r}")
            out.append(("op", op))
        pos = m.end()
    out.append(("end", None))
    return out


class _RawPoly:
    """Unreduced polynomial over the base field in a list of variable names."""

    __slots__ = ("base", "n", "terms")

    def __init__(self, base, n, terms):
        self.base = base
        self.n = n
        self.terms = terms

    @classmethod
    def const(cls, base, n, c):
        c = base.coerce(c)
        return cls(base, n, {} if base.is_zero(c) else {(0,) * n: c})

    def add(self, other):
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, self.base.zero) + c
            if self.base.is_zero(v):
                out.pop(e, None)
            else:
                out[e] = v % self.base.p if self.base.is_prime_field else v
        return _RawPoly(self.base, self.n, out)

    def neg(self):
        return _RawPoly(self.base, self.n, {e: -c % self.base.p if self.base.is_prime_field else -c
                                           for e, c in self.terms.items()})

    def mul(self, other):
        out: dict = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                out[e] = out.get(e, self.base.zero) + ca * cb
        if self.base.is_prime_field:
            out = {e: c % self.base.p for e, c in out.items() if c % self.base.p}
        else:
            out = {e: c for e, c in out.items() if c}
        return _RawPoly(self.base, self.n, out)

    def pow(self, k):
        result = _RawPoly.const(self.base, self.n, 1)
        base = self
        while k:
            if k & 1:
                result = result.mul(base)
            k >>= 1
            if k:
                base = base.mul(base)
        return result

    def constant_value(self):
        if any(any(e) for e in self.terms):
            return None
        return self.terms.get((0,) * self.n, self.base.zero)


class _Parser:
    def __init__(self, text, names, base):
        self.toks = _tokenize(text)
        self.i = 0
        self.names = list(names)
        self.base = base
        self.n = len(self.names)
        self.text = text

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, op):
        t = self.take()
        if t != ("op", op):
            raise ValueError(f"expected {op!r} in {self.text!r}")

    def parse(self):
        r = self.expr()
        if self.peek()[0] != "end":
            raise ValueError(f"trailing input in {self.text!r}")
        return r

    def expr(self):
        r = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            t = self.term()
            r = r.add(t if op == "+" else t.neg())
        return r

    def term(self):
        r = self.unary()
        while True:
            t = self.peek()
            if t in (("op", "*"), ("op", "/")):
                self.take()
                rhs = self.unary()
                if t[1] == "*":
                    r = r.mul(rhs)
                else:
                    c = rhs.constant_value()
                    if c is None:
                        raise UnsupportedOperation("division only by base-field constants")
                    r = r.mul(_RawPoly.const(self.base, self.n, self.base.inv(c)))
            elif t[0] in ("num", "id") or t == ("op", "("):
                r = r.mul(self.unary())
            else:
                return r

    def unary(self):
        t = self.peek()
        if t == ("op", "-"):
            self.take()
            return self.unary().neg()
        if t == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        a = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            e = self.exponent()
            if e < 0:
                raise UnsupportedOperation("negative exponents are not supported")
            a = a.pow(e)
        return a

    def exponent(self):
        t = self.take()
        if t[0] == "num":
            return t[1]
        if t == ("op", "("):
            sign = 1
            if self.peek() == ("op", "-"):
                self.take()
                sign = -1
            v = self.take()
            if v[0] != "num":
                raise ValueError(f"exponent must be an integer in {self.text!r}")
            self.expect(")")
            return sign * v[1]
        if t == ("op", "-"):
            raise UnsupportedOperation("negative exponents are not supported")
        raise ValueError(f"bad exponent in {self.text!r}")

    def atom(self):
        t = self.take()
        if t[0] == "num":
            return _RawPoly.const(self.base, self.n, t[1])
        if t[0] == "id":
            name = t[1]
            if name in self.names:
                e = [0] * self.n
                e[self.names.index(name)] = 1
                return _RawPoly(self.base, self.n, {tuple(e): self.base.one})
            if name in self.base.params:
                return _RawPoly.const(self.base, self.n, self.base.param(name))
            raise PresentationMismatch(f"unknown variable {name!r}")
        if t == ("op", "("):
            r = self.expr()
            self.expect(")")
            return r
        raise ValueError(f"unexpected token {t[1]!r} in {self.text!r}")


def parse_raw(text: str, names: Sequence[str], base: BaseField) -> dict:
    """Parse ``text`` into an unreduced ``{exponent tuple: coefficient}`` map."""
    return _Parser(text, names, base).parse().terms


# ---------------------------------------------------------------------------
# presentations


@dataclass(frozen=True)
class _Relation:
    degree: int  # 0 for a free variable
    tail: tuple  # ((exps, coeff), ...) normal form of g_i over earlier variables


class TriangularPresentation:
    """``base[v_1, ..., v_k] / (v_i^{d_i} - g_i)`` with ``g_i`` in earlier variables.

    ``variables`` is a sequence of ``(name, relation)`` where ``relation`` is
    ``None`` (free), an integer ``d`` (meaning ``v^d = 0``), or a pair
    ``(d, tail)`` with ``tail`` a string or raw exponent map.
    """

    def __init__(self, base: BaseField, variables: Sequence):
        self.base = base
        names = []
        specs = []
        for name, rel in variables:
            if not _IDENT.fullmatch(name):
                raise ValueError(f"bad variable name {name!r}")
            if name in names or name in base.params:
                raise ValueError(f"duplicate name {name!r}")
            if rel is None:
                specs.append((0, None))
            elif isinstance(rel, int):
                specs.append((rel, None))
            else:
                d, tail = rel
                specs.append((int(d), tail))
            if specs[-1][0] < 0 or (rel is not None and specs[-1][0] < 1):
                raise ValueError("relation exponents must be >= 1")
            names.append(name)
        self.names = tuple(names)
        self.k = len(names)
        self.degrees = tuple(d for d, _ in specs)
        self._index = {n: i for i, n in enumerate(names)}
        self._build_layout()
        self._cache: dict = {}
        self._tail_pows: dict = {}
        self._relations: list = []
        self._tail_elems: list = []
        for i, (d, tail) in enumerate(specs):
            if d == 0 or tail is None:
                elem = None
                tail_terms = ()
            else:
                raw = tail if isinstance(tail, Mapping) else parse_raw(tail, names[:i], base)
                raw = {tuple(e) + (0,) * (self.k - len(e)): base.coerce(c) for e, c in raw.items()}
                if any(any(e[i:]) for e in raw):
                    raise ValueError(f"tail of {names[i]} must only involve earlier variables")
                elem = self._from_raw(raw)
                tail_terms = tuple(sorted((self.decode(key), c) for key, c in elem.terms.items()))
                if not tail_terms:
                    elem = None
            self._relations.append(_Relation(d, tail_terms))
            self._tail_elems.append(elem)
        self._nil_guard = 0
        self._tail_guard = 0
        for i in range(self.k):
            if self.degrees[i]:
                if self._tail_elems[i] is None:
                    self._nil_guard |= self._guards[i]
                else:
                    self._tail_guard |= self._guards[i]
        self._kernel_layout = self._make_kernel_layout()

    # -- layout ---------------------------------------------------------------

    def _build_layout(self):
        widths = []
        biases = []
        guards_local = []
        for d in self.degrees:
            if d:
                w = d.bit_length()
                widths.append(w + 1)
                biases.append((1 << w) - d)
                guards_local.append(1 << w)
            else:
                widths.append(FREE_BITS)
                biases.append(0)
                guards_local.append(0)
        offs = [0] * self.k
        acc = 0
        for i in reversed(range(self.k)):
            offs[i] = acc
            acc += widths[i]
        self.total_bits = acc
        self._offs = tuple(offs)
        self._masks = tuple((1 << w) - 1 for w in widths)
        self._bias = sum(b << o for b, o in zip(biases, offs))
        self._guards = tuple(g << o for g, o in zip(guards_local, offs))
        self._guard = sum(self._guards)

    def _make_kernel_layout(self):
        if not self.base.is_prime_field or self.k == 0:
            return None
        if any(d == 0 for d in self.degrees) or self._tail_guard:
            return None
        if self.total_bits > 62 or self.rank > KERNEL_MAX_RANK:
            return None
        strides = []
        s = 1
        for d in reversed(self.degrees):
            strides.append(s)
            s *= d
        strides.reverse()
        return (
            np.array(self._offs, dtype=np.int64),
            np.array(self._masks, dtype=np.int64),
            np.array(strides, dtype=np.int64),
            np.array(self.degrees, dtype=np.int64),
            np.int64(self._bias),
            np.int64(self._guard),
            self.rank,
        )

    def encode(self, exps: Sequence[int]) -> int:
        key = 0
        for e, o, d in zip(exps, self._offs, self.degrees):
            if e < 0:
                raise ValueError("negative exponent")
            if not d and e >= 1 << (FREE_BITS - 1):
                raise UnsupportedOperation("exponent of a free variable too large")
            key |= e << o
        return key

    def decode(self, key: int) -> tuple:
        return tuple((key >> o) & m for o, m in zip(self._offs, self._masks))

    # -- structure ---------------------------------------------------------

    @property
    def rank(self):
        if any(d == 0 for d in self.degrees):
            return math.inf
        return math.prod(self.degrees)

    @property
    def is_finite(self) -> bool:
        return all(self.degrees)

    @property
    def is_monomial_quotient(self) -> bool:
        """All relations are ``v^d = 0``."""
        return not self._tail_guard

    def relation(self, name: str):
        i = self.index(name)
        return self.degrees[i], self._tail_elems[i]

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise PresentationMismatch(f"unknown variable {name!r}") from None

    def basis(self) -> list:
        """Canonical monomial basis, lexicographic with the first variable most significant."""
        if not self.is_finite:
            raise UnsupportedOperation("infinite-rank presentation has no finite basis")
        return list(itertools.product(*(range(d) for d in self.degrees)))

    def nilpotency_bound(self) -> int:
        """An ``N`` with ``a^N = 0`` for every nilpotent ``a`` of a finite-rank ring."""
        if self.is_monomial_quotient:
            return 1 + sum(d - 1 for d in self.degrees if d)
        if not self.is_finite:
            raise UndecidableHere("no nilpotency bound for an infinite-rank presentation")
        return self.rank

    def extend(self, variables: Sequence) -> "TriangularPresentation":
        """Presentation with extra variables appended (tails may use old ones)."""
        old = []
        for i, name in enumerate(self.names):
            d = self.degrees[i]
            if not d:
                old.append((name, None))
            elif self._tail_elems[i] is None:
                old.append((name, d))
            else:
                old.append((name, (d, {e: c for e, c in self._relations[i].tail})))
        return TriangularPresentation(self.base, old + list(variables))

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, TriangularPresentation):
            return NotImplemented
        return (self.base == other.base and self.names == other.names
                and self.degrees == other.degrees and self._relations == other._relations)

    def __hash__(self):
        return hash((self.base, self.names, self.degrees))

    def __repr__(self):
        rels = []
        for i, n in enumerate(self.names):
            d = self.degrees[i]
            if not d:
                rels.append(f"{n} free")
            else:
                tail = self._tail_elems[i]
                rels.append(f"{n}^{d} = {tail if tail is not None else 0}")
        return f"TriangularPresentation({self.base}; {', '.join(rels)})"

    # -- elements ------------------------------------------------------------

    def zero(self) -> "RingElem":
        return RingElem(self, {})

    def one(self) -> "RingElem":
        return self.const(1)

    def const(self, c) -> "RingElem":
        c = self.base.coerce(c)
        if self.base.is_zero(c):
            return RingElem(self, {})
        return RingElem(self, {0: c})

    def gen(self, name: str) -> "RingElem":
        e = [0] * self.k
        e[self.index(name)] = 1
        return self._from_raw({tuple(e): self.base.one})

    def gens(self) -> tuple:
        return tuple(self.gen(n) for n in self.names)

    def monomial(self, exps) -> "RingElem":
        if isinstance(exps, Mapping):
            e = [0] * self.k
            for n, x in exps.items():
                e[self.index(n)] = x
            exps = e
        return self._from_raw({tuple(exps): self.base.one})

    def parse(self, text: str) -> "RingElem":
        return normal_form(text, self)

    def _from_raw(self, raw: Mapping) -> "RingElem":
        base = self.base
        out: dict = {}
        for exps, c in raw.items():
            if base.is_zero(c):
                continue
            for key, rc in self._reduce_exps(tuple(exps)):
                out[key] = out.get(key, base.zero) + c * rc
        return RingElem(self, _clean(out, base))

    def _reduce_exps(self, exps: tuple) -> tuple:
        """Normal form of a single monomial as ``((key, coeff), ...)``."""
        hit = self._cache.get(exps)
        if hit is not None:
            return hit
        base = self.base
        result = None
        for i in reversed(range(len(self._relations))):
            d = self.degrees[i]
            if d and exps[i] >= d:
                tail = self._tail_elems[i]
                if tail is None:
                    result = ()
                    break
                q, r = divmod(exps[i], d)
                rest = exps[:i] + (r,) + exps[i + 1:]
                acc: dict = {}
                for texps, tc in self._tail_power(i, q):
                    new = tuple(x + y for x, y in zip(rest, texps))
                    for key, c in self._reduce_exps(new):
                        acc[key] = acc.get(key, base.zero) + tc * c
                result = tuple(_clean(acc, base).items())
                break
        if result is None:
            result = ((self.encode(exps), base.one),)
        self._cache[exps] = result
        return result

    def _tail_power(self, i: int, q: int) -> tuple:
        hit = self._tail_pows.get((i, q))
        if hit is None:
            elem = self._tail_elems[i] ** q
            hit = tuple((self.decode(key), c) for key, c in elem.terms.items())
            self._tail_pows[(i, q)] = hit
        return hit


def _clean(d: dict, base: BaseField) -> dict:
    if base.is_prime_field:
        p = base.p
        return {k: v % p for k, v in d.items() if v % p}
    return {k: v for k, v in d.items() if v}


def monomial_ring(p: int, degrees: Mapping[str, int] | Sequence, params: Sequence[str] = ()) -> TriangularPresentation:
    """``F_p[v_1..v_k]/(v_i^{d_i})``, the shape of every coordinate ring of ``U_n``."""
    items = degrees.items() if isinstance(degrees, Mapping) else degrees
    return TriangularPresentation(BaseField(p, tuple(params)), [(n, int(d)) for n, d in items])


# ---------------------------------------------------------------------------
# ring elements


class RingElem:
    """Element of a :class:`TriangularPresentation`, always in normal form."""

    __slots__ = ("pres", "terms")

    def __init__(self, pres: TriangularPresentation, terms: dict):
        self.pres = pres
        self.terms = terms

    # -- coercion ------------------------------------------------------------

    def _other(self, other):
        if isinstance(other, RingElem):
            if other.pres is not self.pres and other.pres != self.pres:
                raise PresentationMismatch("operands live in different presentations")
            return other
        if isinstance(other, (int, np.integer, FieldElem)):
            return self.pres.const(other)
        return None

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        other = self._other(other)
        if other is None:
            return NotImplemented
        base = self.pres.base
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        out = dict(a)
        if base.is_prime_field:
            p = base.p
            for k, c in b.items():
                v = (out.get(k, 0) + c) % p
                if v:
                    out[k] = v
                else:
                    out.pop(k, None)
        else:
            for k, c in b.items():
                v = out.get(k, base.zero) + c
                if v:
                    out[k] = v
                else:
                    out.pop(k, None)
        return RingElem(self.pres, out)

    __radd__ = __add__

    def __neg__(self):
        base = self.pres.base
        if base.is_prime_field:
            p = base.p
            return RingElem(self.pres, {k: p - c for k, c in self.terms.items()})
        return RingElem(self.pres, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        other = self._other(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._other(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._other(other)
        if other is None:
            return NotImplemented
        return _mul(self, other)

    __rmul__ = __mul__

    def scale(self, c) -> "RingElem":
        base = self.pres.base
        c = base.coerce(c)
        if base.is_zero(c):
            return self.pres.zero()
        if base.is_prime_field:
            p = base.p
            return RingElem(self.pres, {k: v * c % p for k, v in self.terms.items()})
        return RingElem(self.pres, {k: v * c for k, v in self.terms.items()})

    def __pow__(self, e: int):
        if not isinstance(e, (int, np.integer)):
            return NotImplemented
        e = int(e)
        if e < 0:
            raise UnsupportedOperation("negative powers are not supported")
        return _power(self, e)

    def frobenius(self, times: int = 1) -> "RingElem":
        """``self^(p^times)``, computed term by term (the ring is commutative of characteristic p)."""
        x = self
        for _ in range(times):
            x = _frobenius(x)
        return x

    def inverse(self) -> "RingElem":
        return ring_inverse(self)

    # -- comparison ----------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, RingElem):
            if other.pres is not self.pres and other.pres != self.pres:
                return False
            return self.terms == other.terms
        if isinstance(other, (int, np.integer, FieldElem)):
            return self.terms == self.pres.const(other).terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    # -- inspection ----------------------------------------------------------

    def constant_term(self):
        return self.terms.get(0, self.pres.base.zero)

    def is_constant(self) -> bool:
        return all(k == 0 for k in self.terms)

    def monomials(self) -> list:
        """``[(exponent tuple, coefficient)]`` in descending lex order."""
        return [(self.pres.decode(k), self.terms[k]) for k in sorted(self.terms, reverse=True)]

    def coefficient(self, exps) -> object:
        if isinstance(exps, Mapping):
            e = [0] * self.pres.k
            for n, x in exps.items():
                e[self.pres.index(n)] = x
            exps = e
        return self.terms.get(self.pres.encode(exps), self.pres.base.zero)

    def support_variables(self) -> set:
        used = set()
        for k in self.terms:
            for n, e in zip(self.pres.names, self.pres.decode(k)):
                if e:
                    used.add(n)
        return used

    def degree_in(self, name: str) -> int:
        i = self.pres.index(name)
        if not self.terms:
            return -1
        return max(self.pres.decode(k)[i] for k in self.terms)

    def lift(self, target: TriangularPresentation) -> "RingElem":
        """Image under the inclusion into a presentation that extends this one."""
        if target is self.pres:
            return self
        if target.names[: self.pres.k] != self.pres.names:
            raise PresentationMismatch("target does not extend this presentation")
        pad = (0,) * (target.k - self.pres.k)
        return target._from_raw({self.pres.decode(k) + pad: c for k, c in self.terms.items()})

    def substitute(self, images: Mapping[str, "RingElem"], target: TriangularPresentation | None = None,
                   check: bool = False) -> "RingElem":
        """Apply the ring map sending each named variable to ``images[name]``.

        Unnamed variables go to the variable of the same name in ``target``.
        With ``check=True`` every relation ``v^d = g`` is verified on the
        images first, so the map is certified to be well defined.
        """
        src = self.pres
        target = target or src
        imgs = []
        for n in src.names:
            if n in images:
                img = images[n]
                if not isinstance(img, RingElem):
                    img = target.const(img)
                elif img.pres is not target and img.pres != target:
                    raise PresentationMismatch(f"image of {n} is not in the target presentation")
                imgs.append(img)
            else:
                imgs.append(target.gen(n))
        extra = set(images) - set(src.names)
        if extra:
            raise PresentationMismatch(f"unknown variables {sorted(extra)}")
        if check:
            _check_relations(src, imgs, target)
        return _evaluate(self, imgs, target)

    # -- printing ------------------------------------------------------------

    def __str__(self):
        return format_elem(self)

    def __repr__(self):
        return f"RingElem({self})"


def _mul(a: RingElem, b: RingElem) -> RingElem:
    pres = a.pres
    ta, tb = a.terms, b.terms
    if not ta or not tb:
        return RingElem(pres, {})
    base = pres.base
    if pres._kernel_layout is not None and len(ta) * len(tb) >= KERNEL_MIN_PAIRS:
        return _mul_kernel(a, b)
    bias, guard, nil_guard = pres._bias, pres._guard, pres._nil_guard
    out: dict = {}
    overflow = []
    if base.is_prime_field:
        get = out.get
        for kb, cb in tb.items():
            for ka, ca in ta.items():
                s = ka + kb
                g = (s + bias) & guard
                if g:
                    if not g & nil_guard:
                        overflow.append((s, ca * cb))
                    continue
                out[s] = get(s, 0) + ca * cb
    else:
        zero = base.zero
        for kb, cb in tb.items():
            for ka, ca in ta.items():
                s = ka + kb
                g = (s + bias) & guard
                if g:
                    if not g & nil_guard:
                        overflow.append((s, ca * cb))
                    continue
                out[s] = out.get(s, zero) + ca * cb
    if overflow:
        zero = base.zero
        for s, c in overflow:
            for key, rc in pres._reduce_exps(pres.decode(s)):
                out[key] = out.get(key, zero) + c * rc
    return RingElem(pres, _clean(out, base))


def _mul_kernel(a: RingElem, b: RingElem) -> RingElem:
    pres = a.pres
    ka = np.fromiter(a.terms.keys(), dtype=np.int64, count=len(a.terms))
    va = np.fromiter(a.terms.values(), dtype=np.int64, count=len(a.terms))
    kb = np.fromiter(b.terms.keys(), dtype=np.int64, count=len(b.terms))
    vb = np.fromiter(b.terms.values(), dtype=np.int64, count=len(b.terms))
    keys, vals = kernels.truncated_product(ka, va, kb, vb, pres._kernel_layout, pres.base.p)
    return RingElem(pres, dict(zip(keys.tolist(), vals.tolist())))


def _frobenius(a: RingElem) -> RingElem:
    pres = a.pres
    base = pres.base
    p = base.p
    out: dict = {}
    zero = base.zero
    for k, c in a.terms.items():
        exps = tuple(x * p for x in pres.decode(k))
        fc = base.frob(c)
        for key, rc in pres._reduce_exps(exps):
            out[key] = out.get(key, zero) + fc * rc
    return RingElem(pres, _clean(out, base))


def _power(a: RingElem, e: int) -> RingElem:
    pres = a.pres
    if e == 0:
        return pres.one()
    p = pres.base.p
    result = None
    frob = a
    while e:
        e, digit = divmod(e, p)
        if digit:
            t = frob
            for _ in range(digit - 1):
                t = t * frob
            result = t if result is None else result * t
        if e:
            frob = _frobenius(frob)
    return result


def _evaluate(a: RingElem, imgs: list, target: TriangularPresentation) -> RingElem:
    src = a.pres
    powers: list = [dict() for _ in imgs]

    def pw(i, e):
        hit = powers[i].get(e)
        if hit is None:
            hit = imgs[i] ** e
            powers[i][e] = hit
        return hit

    total = target.zero()
    for k, c in a.terms.items():
        term = target.const(c)
        for i, e in enumerate(src.decode(k)):
            if e:
                term = term * pw(i, e)
                if not term:
                    break
        total = total + term
    return total


def _check_relations(src: TriangularPresentation, imgs: list, target: TriangularPresentation) -> None:
    for i, n in enumerate(src.names):
        d = src.degrees[i]
        if not d:
            continue
        tail = src._tail_elems[i]
        lhs = imgs[i] ** d
        rhs = _evaluate(tail, imgs, target) if tail is not None else target.zero()
        if lhs != rhs:
            raise PresentationMismatch(f"images do not satisfy the relation for {n}")


# ---------------------------------------------------------------------------
# module-level operations


def normal_form(raw, pres: TriangularPresentation) -> RingElem:
    """Normal form of a raw polynomial (string or ``{exponents: coefficient}``).

    Exponent keys may be tuples (one entry per variable) or name mappings
    given as tuples of ``(name, exponent)`` pairs.
    """
    if isinstance(raw, RingElem):
        if raw.pres != pres:
            raise PresentationMismatch("element from a different presentation")
        return raw
    if isinstance(raw, str):
        terms = parse_raw(raw, pres.names, pres.base)
    else:
        terms = {}
        for e, c in raw.items():
            if e and isinstance(e[0], tuple):
                v = [0] * pres.k
                for n, x in e:
                    v[pres.index(n)] += x
                e = tuple(v)
            elif len(e) != pres.k:
                raise PresentationMismatch("exponent vector has the wrong length")
            terms[tuple(e)] = pres.base.coerce(c) + terms.get(tuple(e), pres.base.zero)
    return pres._from_raw(terms)


def ring_arith(op: str, a: RingElem, b) -> RingElem:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        if isinstance(b, RingElem) and b.pres != a.pres:
            raise PresentationMismatch("operands live in different presentations")
        return a * b
    if op == "pow":
        return a ** b
    raise ValueError(f"unknown operation {op!r}")


def _finite_support(a: RingElem) -> None:
    pres = a.pres
    if pres.is_finite:
        return
    used = set(a.support_variables())
    frontier = list(used)
    while frontier:
        n = frontier.pop()
        i = pres.index(n)
        if not pres.degrees[i]:
            raise UndecidableHere(f"element involves the free variable {n}")
        tail = pres._tail_elems[i]
        if tail is not None:
            for m in tail.support_variables() - used:
                used.add(m)
                frontier.append(m)


def is_nilpotent(a: RingElem) -> bool:
    """``a^N == 0`` for the certified bound ``N`` of the presentation."""
    _finite_support(a)
    pres = a.pres
    if pres.is_finite:
        bound = pres.nilpotency_bound()
    elif pres.is_monomial_quotient:
        bound = 1 + sum(d - 1 for d in pres.degrees if d)
    else:
        # the subring generated by the support is finite; bound by its rank
        used = a.support_variables()
        bound = 1
        for n in used:
            bound *= pres.degrees[pres.index(n)]
        # tails can pull in further variables; close over them
        closure = set(used)
        stack = list(used)
        while stack:
            tail = pres._tail_elems[pres.index(stack.pop())]
            if tail is not None:
                for m in tail.support_variables() - closure:
                    closure.add(m)
                    stack.append(m)
        bound = math.prod(pres.degrees[pres.index(n)] for n in closure) if closure else 1
    x = a
    reach = 1
    while reach < bound and x:
        x = x.frobenius()
        reach *= pres.base.p
    return not x


def multiplication_matrix(a: RingElem) -> list:
    """Columns are the coordinates of ``a * b_j`` for the canonical basis ``b_j``."""
    pres = a.pres
    if not pres.is_finite:
        raise UnsupportedOperation("infinite-rank presentation")
    cols = [monomial_coordinates(a * pres.monomial(e)) for e in pres.basis()]
    return [list(r) for r in zip(*cols)]


def is_unit(a: RingElem, method: str = "auto") -> bool:
    """Whether multiplication by ``a`` is invertible.

    ``method="matrix"`` always decides via the rank of the multiplication
    map.  ``"auto"`` uses it up to rank 512; larger monomial quotients are
    local rings with maximal ideal generated by the variables, so there the
    constant term decides.
    """
    pres = a.pres
    if not pres.is_finite:
        raise UnsupportedOperation("is_unit needs a finite-rank presentation")
    if method == "local" or (method == "auto" and pres.rank > 512):
        if not pres.is_monomial_quotient:
            if method == "local":
                raise UnsupportedOperation("local criterion needs a monomial quotient")
        else:
            return not pres.base.is_zero(a.constant_term())
    m = multiplication_matrix(a)
    return matrix_rank(m, pres.base) == pres.rank


def ring_inverse(a: RingElem) -> RingElem:
    pres = a.pres
    base = pres.base
    if pres.is_monomial_quotient and (pres.is_finite or not (a.support_variables()
                                                            & {n for n, d in zip(pres.names, pres.degrees) if not d})):
        c = a.constant_term()
        if base.is_zero(c):
            raise NotInvertible("element has zero constant term in a local ring")
        ci = base.inv(c)
        t = -(a.scale(ci) - 1)
        # 1/(1 - t) = sum t^k, and t is nilpotent
        total = pres.one()
        pw = pres.one()
        while True:
            pw = pw * t
            if not pw:
                break
            total = total + pw
        return total.scale(ci)
    if not pres.is_finite:
        raise UnsupportedOperation("inverse needs a finite-rank presentation")
    m = multiplication_matrix(a)
    basis = pres.basis()
    rhs = [base.zero] * len(basis)
    rhs[basis.index((0,) * pres.k)] = base.one
    sol = solve_linear(m, rhs, base)
    if sol is None:
        raise NotInvertible(f"{a} is not a unit")
    return pres._from_raw({e: c for e, c in zip(basis, sol) if not base.is_zero(c)})


def monomial_coordinates(a: RingElem) -> list:
    """Coordinates in the basis of :meth:`TriangularPresentation.basis`."""
    pres = a.pres
    if not pres.is_finite:
        raise UnsupportedOperation("infinite-rank presentation")
    base = pres.base
    out = [base.zero] * pres.rank
    strides = []
    s = 1
    for d in reversed(pres.degrees):
        strides.append(s)
        s *= d
    strides.reverse()
    for k, c in a.terms.items():
        idx = sum(e * st for e, st in zip(pres.decode(k), strides))
        out[idx] = c
    return out


# ---------------------------------------------------------------------------
# linear algebra over the base field


def matrix_rank(rows: list, base: BaseField) -> int:
    if not rows or not rows[0]:
        return 0
    if base.is_prime_field:
        return kernels.rank_mod_p(np.array(rows, dtype=np.int64), base.p)
    m = [list(r) for r in rows]
    return _eliminate(m, base)[0]


def _eliminate(m: list, base: BaseField):
    rows, cols = len(m), len(m[0])
    rank = 0
    pivots = []
    for col in range(cols):
        piv = next((r for r in range(rank, rows) if not base.is_zero(m[r][col])), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = base.inv(m[rank][col])
        m[rank] = [_fmul(base, x, inv) for x in m[rank]]
        for r in range(rows):
            if r != rank and not base.is_zero(m[r][col]):
                f = m[r][col]
                m[r] = [_fsub(base, x, _fmul(base, f, y)) for x, y in zip(m[r], m[rank])]
        pivots.append(col)
        rank += 1
        if rank == rows:
            break
    return rank, pivots


def _fmul(base, x, y):
    return x * y % base.p if base.is_prime_field else x * y


def _fsub(base, x, y):
    return (x - y) % base.p if base.is_prime_field else x - y


def solve_linear(mat: list, rhs: list, base: BaseField):
    """A solution of ``mat @ x = rhs`` over the base field, or ``None``."""
    n = len(mat[0])
    aug = [list(r) + [b] for r, b in zip(mat, rhs)]
    rank, pivots = _eliminate(aug, base)
    if n in pivots:
        return None
    x = [base.zero] * n
    for r, col in enumerate(pivots):
        x[col] = aug[r][n]
    return x


# ---------------------------------------------------------------------------
# printing


def _fmt_mono(names, exps) -> str:
    return "*".join(n if e == 1 else f"{n}^{e}" for n, e in zip(names, exps) if e)


def format_coeff(c, base: BaseField, bare: bool) -> str:
    s = base.fmt(c)
    if bare or base.is_prime_field:
        return s
    if isinstance(c, FieldElem) and c.is_polynomial() and len(c.num) > 1:
        return f"({s})"
    return s


def format_elem(a: RingElem) -> str:
    pres = a.pres
    base = pres.base
    if not a.terms:
        return "0"
    parts = []
    for exps, c in a.monomials():
        mono = _fmt_mono(pres.names, exps)
        if not mono:
            parts.append(format_coeff(c, base, bare=False))
        elif c == base.one:
            parts.append(mono)
        else:
            parts.append(f"{format_coeff(c, base, bare=False)}*{mono}")
    return " + ".join(parts)


def random_element(pres: TriangularPresentation, rng, density: float = 0.5, max_free_degree: int = 3) -> RingElem:
    """Random normal-form element; ``rng`` is a :class:`random.Random`."""
    base = pres.base
    p = base.p
    ranges = [range(d) if d else range(max_free_degree + 1) for d in pres.degrees]
    cells = list(itertools.product(*ranges))
    raw = {}
    for e in cells:
        if rng.random() < density:
            c = rng.randrange(1, p)
            if not base.is_prime_field and rng.random() < 0.3:
                t = base.param(rng.choice(base.params))
                c = base.coerce(c) * t
            raw[e] = base.coerce(c)
    return pres._from_raw(raw)
