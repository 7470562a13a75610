"""Sparse multivariate polynomials over F_p.

A polynomial is a ``dict`` mapping exponent tuples (one entry per
parameter) to nonzero integers in ``range(p)``.  Functions never mutate
their arguments.
"""

from __future__ import annotations

Poly = dict


def const(c: int, nvars: int, p: int) -> Poly:
    c %= p
    return {(0,) * nvars: c} if c else {}


def gen(i: int, nvars: int) -> Poly:
    e = [0] * nvars
    e[i] = 1
    return {tuple(e): 1}


def add(a: Poly, b: Poly, p: int) -> Poly:
    if len(a) < len(b):
        a, b = b, a
    out = dict(a)
    for e, c in b.items():
        v = (out.get(e, 0) + c) % p
        if v:
            out[e] = v
        else:
            out.pop(e, None)
    return out


def neg(a: Poly, p: int) -> Poly:
    return {e: p - c for e, c in a.items()}


def sub(a: Poly, b: Poly, p: int) -> Poly:
    return add(a, neg(b, p), p)


def scale(a: Poly, c: int, p: int) -> Poly:
    c %= p
    if not c:
        return {}
    return {e: v * c % p for e, v in a.items()}


def mul(a: Poly, b: Poly, p: int) -> Poly:
    if not a or not b:
        return {}
    if len(a) < len(b):
        a, b = b, a
    out: dict = {}
    for eb, cb in b.items():
        for ea, ca in a.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, 0) + ca * cb
    return {e: v % p for e, v in out.items() if v % p}


def power(a: Poly, k: int, p: int, nvars: int) -> Poly:
    result = const(1, nvars, p)
    base = a
    while k:
        if k & 1:
            result = mul(result, base, p)
        k >>= 1
        if k:
            base = mul(base, base, p)
    return result


def frobenius(a: Poly, p: int) -> Poly:
    # c^p == c for c in F_p
    return {tuple(x * p for x in e): c for e, c in a.items()}


def leading(a: Poly):
    """Lex-largest exponent and its coefficient."""
    e = max(a)
    return e, a[e]


def total_degree(a: Poly) -> int:
    return max(sum(e) for e in a) if a else -1


def monomial_content(a: Poly) -> tuple:
    """Componentwise minimum exponent over all terms."""
    it = iter(a)
    m = list(next(it))
    for e in it:
        for i, x in enumerate(e):
            if x < m[i]:
                m[i] = x
    return tuple(m)


def shift_down(a: Poly, m: tuple) -> Poly:
    return {tuple(x - y for x, y in zip(e, m)): c for e, c in a.items()}


def divexact(a: Poly, b: Poly, p: int):
    """Return ``a / b`` if ``b`` divides ``a`` exactly, else ``None``.

    Multivariate division with respect to lex order; the remainder is
    zero iff ``b`` divides ``a`` because ``b`` is a single divisor.
    """
    if not b:
        raise ZeroDivisionError("division by zero polynomial")
    if not a:
        return {}
    lb, cb = leading(b)
    inv = pow(cb, p - 2, p)
    rem = dict(a)
    quot: dict = {}
    while rem:
        la, ca = leading(rem)
        if any(x < y for x, y in zip(la, lb)):
            return None
        qe = tuple(x - y for x, y in zip(la, lb))
        qc = ca * inv % p
        quot[qe] = qc
        for e, c in b.items():
            t = tuple(x + y for x, y in zip(e, qe))
            v = (rem.get(t, 0) - qc * c) % p
            if v:
                rem[t] = v
            else:
                rem.pop(t, None)
    return quot


def univariate_gcd(a: Poly, b: Poly, p: int) -> Poly:
    """Monic gcd of two polynomials in a single parameter."""
    da = _to_dense(a)
    db = _to_dense(b)
    while db:
        da, db = db, _dense_rem(da, db, p)
    if not da:
        return {}
    inv = pow(da[-1], p - 2, p)
    return {(i,): c * inv % p for i, c in enumerate(da) if c * inv % p}


def _to_dense(a: Poly) -> list:
    if not a:
        return []
    out = [0] * (max(e[0] for e in a) + 1)
    for e, c in a.items():
        out[e[0]] = c
    return out


def _dense_rem(a: list, b: list, p: int) -> list:
    a = list(a)
    inv = pow(b[-1], p - 2, p)
    db = len(b) - 1
    while len(a) - 1 >= db and a:
        q = a[-1] * inv % p
        shift = len(a) - 1 - db
        if q:
            for i, c in enumerate(b):
                a[shift + i] = (a[shift + i] - q * c) % p
        while a and a[-1] == 0:
            a.pop()
    return a


def to_str(a: Poly, names) -> str:
    if not a:
        return "0"
    parts = []
    for e in sorted(a, reverse=True):
        c = a[e]
        mono = "*".join(
            n if x == 1 else f"{n}^{x}" for n, x in zip(names, e) if x
        )
        if not mono:
            parts.append(str(c))
        elif c == 1:
            parts.append(mono)
        else:
            parts.append(f"{c}*{mono}")
    return " + ".join(parts)
