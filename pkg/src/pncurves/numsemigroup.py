"""Numerical semigroups, the family ``Gamma_{p,n}`` and its closed-form invariants."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterable

import numpy as np

from . import kernels
from .errors import GluingHypothesisError, NotNumericalSemigroup


class NumericalSemigroup:
    """Submonoid of the naturals with finite complement, given by generators.

    The membership table covers ``[0, bound]`` with ``bound`` at least
    ``conductor + max(generators)``; it is extended on demand.  The
    conductor is certified by a run of ``max(generators)`` consecutive
    members, since any larger integer is a member plus a generator.
    """

    def __init__(self, gens: Iterable[int]):
        gens = sorted({int(g) for g in gens})
        if not gens:
            raise ValueError("at least one generator is required")
        if gens[0] <= 0:
            raise ValueError("generators must be positive")
        if reduce(math.gcd, gens) != 1:
            raise NotNumericalSemigroup(f"gcd of {gens} is {reduce(math.gcd, gens)}, not 1")
        self.generators = tuple(gens)
        self._table = np.zeros(1, dtype=np.bool_)
        self._conductor = None
        self._min_gens = None
        self._certify()

    def _certify(self):
        gmax = self.generators[-1]
        bound = max(4 * gmax, 64)
        while True:
            table = kernels.semigroup_membership(self.generators, bound)
            holes = np.flatnonzero(~table)
            start = int(holes[-1]) + 1 if holes.size else 0
            # everything past start is a member; certified once the run is gmax long
            if bound + 1 - start >= gmax:
                self._table = table
                self._conductor = start
                return
            bound *= 2

    def _ensure(self, bound: int):
        if bound >= self._table.size:
            self._table = kernels.semigroup_membership(self.generators, max(bound, 2 * self._table.size))

    @property
    def conductor(self) -> int:
        return self._conductor

    @property
    def gaps(self) -> list:
        c = self._conductor
        return np.flatnonzero(~self._table[:c]).tolist()

    @property
    def genus(self) -> int:
        return len(self.gaps)

    @property
    def multiplicity(self) -> int:
        return self.generators[0] if self._conductor else 1

    @property
    def bound(self) -> int:
        return self._table.size - 1

    def __contains__(self, a) -> bool:
        a = int(a)
        if a < 0:
            return False
        if a >= self._conductor:
            return True
        return bool(self._table[a])

    def members_upto(self, m: int) -> list:
        return [a for a in range(m + 1) if a in self]

    def membership_table(self, bound: int) -> np.ndarray:
        self._ensure(bound)
        return self._table[: bound + 1].copy()

    def minimal_generators(self) -> tuple:
        if self._min_gens is None:
            gmax = self.generators[-1]
            self._ensure(gmax)
            cand = np.asarray(self.generators, dtype=np.int64)
            mask = kernels.minimal_mask(self._table, cand)
            self._min_gens = tuple(int(a) for a, ok in zip(self.generators, mask) if ok)
        return self._min_gens

    def same_set(self, other: "NumericalSemigroup") -> bool:
        if self.conductor != other.conductor:
            return False
        return all((a in self) == (a in other) for a in range(self.conductor))

    def __eq__(self, other):
        if not isinstance(other, NumericalSemigroup):
            return NotImplemented
        return self.same_set(other)

    def __hash__(self):
        return hash(self.minimal_generators())

    def __repr__(self):
        return f"<{', '.join(map(str, self.minimal_generators()))}>"


def from_generators(gens: Iterable[int]) -> NumericalSemigroup:
    return NumericalSemigroup(gens)


def gamma_pn_generators(p: int, n: int) -> list:
    if n < 0:
        raise ValueError("n must be >= 0")
    q = p**n
    return [q] + [q - p**j for j in range(n)]


def gamma_pn(p: int, n: int) -> NumericalSemigroup:
    """Generated by ``p^n`` and ``p^n - p^j`` for ``0 <= j < n``."""
    gens = [g for g in gamma_pn_generators(p, n) if g > 0]
    return NumericalSemigroup(gens or [1])


def minimal_generators(S: NumericalSemigroup) -> tuple:
    return S.minimal_generators()


@dataclass(frozen=True)
class Invariants:
    c: int
    g: int
    e: int
    d: int


def invariant_formulas(p: int, n: int) -> Invariants:
    c = n * p ** (n + 1) - (n + 2) * p**n + 2
    e = p ** (n - 1) * (p - 1) if p**n >= 3 else 1
    d = n + 1 if (p >= 3 or n == 0) else n
    return Invariants(c=c, g=c // 2, e=e, d=d)


def gluing(a1: int, S1: NumericalSemigroup, a2: int, S2: NumericalSemigroup):
    """``a1*S1 + a2*S2`` and its predicted conductor ``a1 c1 + a2 c2 + (a1-1)(a2-1)``."""
    if math.gcd(a1, a2) != 1:
        raise GluingHypothesisError(f"gcd({a1}, {a2}) != 1")
    if a1 not in S2:
        raise GluingHypothesisError(f"{a1} is not in the second semigroup")
    if a2 not in S1:
        raise GluingHypothesisError(f"{a2} is not in the first semigroup")
    gens = [a1 * g for g in S1.minimal_generators()] + [a2 * g for g in S2.minimal_generators()]
    predicted = a1 * S1.conductor + a2 * S2.conductor + (a1 - 1) * (a2 - 1)
    return NumericalSemigroup(gens), predicted


def blowup(S: NumericalSemigroup) -> NumericalSemigroup:
    """``<b, a_i - b>`` for the multiplicity ``b`` and the other minimal generators ``a_i``."""
    mins = S.minimal_generators()
    b = mins[0]
    if b == 1:
        return NumericalSemigroup([1])
    return NumericalSemigroup([b] + [a - b for a in mins[1:]])


def is_symmetric(S: NumericalSemigroup) -> bool:
    """``c = 2g``, cross-checked against ``a in S <=> c-1-a not in S``."""
    c = S.conductor
    by_count = c == 2 * S.genus
    by_duality = all((a in S) != ((c - 1 - a) in S) for a in range(c))
    if by_count != by_duality:
        raise AssertionError("symmetry characterizations disagree")
    return by_count


def membership_series(S: NumericalSemigroup, N: int) -> list:
    if N < 0:
        raise ValueError("N must be >= 0")
    return [1 if a in S else 0 for a in range(N + 1)]


def apery_set(S: NumericalSemigroup, m: int) -> list:
    """Least member in each residue class modulo the member ``m``."""
    if m not in S or m <= 0:
        raise ValueError("m must be a positive member")
    out = [None] * m
    a = 0
    found = 0
    while found < m:
        if a in S and out[a % m] is None:
            out[a % m] = a
            found += 1
        a += 1
    return out


def gaps_by_enumeration(gens: Iterable[int]) -> list:
    """Independent oracle in pure Python: walk upward until ``max(gens)``
    consecutive members have been seen."""
    gens = sorted(set(gens))
    gmax = gens[-1]
    reach = [True]
    gaps = []
    run = 1
    a = 0
    while run < gmax:
        a += 1
        ok = any(g <= a and reach[a - g] for g in gens)
        reach.append(ok)
        if ok:
            run += 1
        else:
            gaps.append(a)
            run = 0
    return gaps
