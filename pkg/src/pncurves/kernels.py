"""Integer kernels with a numba path and a pure-numpy path.

The numba path is used when numba imports and the environment variable
``PNCURVES_DISABLE_NUMBA`` is unset (or ``0``).  Both paths compute the
same exact integer results; ``set_backend`` switches at runtime, which the
benchmark and the equivalence tests rely on.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

_DISABLED = os.environ.get("PNCURVES_DISABLE_NUMBA", "").strip() not in ("", "0")

BACKEND = "numba" if (HAVE_NUMBA and not _DISABLED) else "numpy"


def set_backend(name: str) -> None:
    global BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not importable")
    BACKEND = name


def get_backend() -> str:
    return BACKEND


# ---------------------------------------------------------------------------
# numpy implementations


def _membership_np(gens: np.ndarray, bound: int) -> np.ndarray:
    member = np.zeros(bound + 1, dtype=np.bool_)
    member[0] = True
    step = int(gens.min())
    # a block shorter than the smallest generator only reads finished entries
    for start in range(1, bound + 1, step):
        stop = min(start + step, bound + 1)
        block = np.zeros(stop - start, dtype=np.bool_)
        for g in gens:
            g = int(g)
            lo = start - g
            if stop - g <= 0:
                continue
            if lo >= 0:
                block |= member[lo:stop - g]
            else:
                block[-lo:] |= member[0:stop - g]
        member[start:stop] = block
    return member


def _series_quotient_np(num: np.ndarray, den: np.ndarray, n_terms: int) -> np.ndarray:
    c = np.zeros(n_terms, dtype=np.int64)
    c[0] = 1
    for k in num:
        k = int(k)
        if k < n_terms:
            c[k:] -= c[: n_terms - k].copy()
    for k in den:
        k = int(k)
        for r in range(min(k, n_terms)):
            c[r::k] = np.cumsum(c[r::k])
    return c


def _rank_mod_p_np(mat: np.ndarray, p: int) -> int:
    m = np.array(mat, dtype=np.int64) % p
    rows, cols = m.shape
    rank = 0
    for col in range(cols):
        if rank == rows:
            break
        nz = np.nonzero(m[rank:, col])[0]
        if nz.size == 0:
            continue
        piv = rank + int(nz[0])
        if piv != rank:
            m[[rank, piv]] = m[[piv, rank]]
        inv = pow(int(m[rank, col]), p - 2, p)
        m[rank] = (m[rank] * inv) % p
        below = m[rank + 1:, col].copy()
        if below.any():
            m[rank + 1:] = (m[rank + 1:] - np.outer(below, m[rank])) % p
        rank += 1
    return rank


def _minimal_mask_np(member: np.ndarray, cand: np.ndarray) -> np.ndarray:
    out = np.zeros(cand.size, dtype=np.bool_)
    for i, a in enumerate(cand):
        a = int(a)
        if a <= 0 or not member[a]:
            continue
        left = member[1:a]
        right = member[a - 1:0:-1]
        out[i] = not np.any(left & right)
    return out


def _truncated_product_np(ka, va, kb, vb, offs, masks, strides, dims, bias, guard, p, rank):
    acc = np.zeros(rank, dtype=np.float64)
    chunk = max(1, 2_000_000 // max(1, kb.size))
    for start in range(0, ka.size, chunk):
        s = ka[start:start + chunk, None] + kb[None, :]
        ok = ((s + bias) & guard) == 0
        s = s[ok]
        if s.size == 0:
            continue
        w = (va[start:start + chunk, None] * vb[None, :])[ok]
        idx = np.zeros(s.size, dtype=np.int64)
        for off, mask, stride in zip(offs, masks, strides):
            idx += ((s >> off) & mask) * stride
        acc += np.bincount(idx, weights=w, minlength=rank)
    acc = np.rint(acc).astype(np.int64) % p
    nz = np.nonzero(acc)[0]
    keys = np.zeros(nz.size, dtype=np.int64)
    for off, stride, dim in zip(offs, strides, dims):
        keys += ((nz // stride) % dim) << off
    return keys, acc[nz]


# ---------------------------------------------------------------------------
# numba implementations

if HAVE_NUMBA:

    @numba.njit(cache=True)
    def _membership_nb(gens, bound):
        member = np.zeros(bound + 1, dtype=np.bool_)
        member[0] = True
        for a in range(1, bound + 1):
            for g in gens:
                if g <= a and member[a - g]:
                    member[a] = True
                    break
        return member

    @numba.njit(cache=True)
    def _series_quotient_nb(num, den, n_terms):
        c = np.zeros(n_terms, dtype=np.int64)
        c[0] = 1
        for k in num:
            for i in range(n_terms - 1, k - 1, -1):
                c[i] -= c[i - k]
        for k in den:
            for i in range(k, n_terms):
                c[i] += c[i - k]
        return c

    @numba.njit(cache=True)
    def _rank_mod_p_nb(mat, p):
        m = mat.copy() % p
        rows, cols = m.shape
        rank = 0
        for col in range(cols):
            if rank == rows:
                break
            piv = -1
            for r in range(rank, rows):
                if m[r, col] != 0:
                    piv = r
                    break
            if piv < 0:
                continue
            if piv != rank:
                for c2 in range(cols):
                    t = m[rank, c2]
                    m[rank, c2] = m[piv, c2]
                    m[piv, c2] = t
            # Fermat inverse
            inv = 1
            base = m[rank, col]
            e = p - 2
            while e > 0:
                if e & 1:
                    inv = inv * base % p
                base = base * base % p
                e >>= 1
            for c2 in range(cols):
                m[rank, c2] = m[rank, c2] * inv % p
            for r in range(rank + 1, rows):
                f = m[r, col]
                if f != 0:
                    for c2 in range(cols):
                        m[r, c2] = (m[r, c2] - f * m[rank, c2]) % p
            rank += 1
        return rank

    @numba.njit(cache=True)
    def _minimal_mask_nb(member, cand):
        out = np.zeros(cand.size, dtype=np.bool_)
        for i in range(cand.size):
            a = cand[i]
            if a <= 0 or not member[a]:
                continue
            ok = True
            for b in range(1, a):
                if member[b] and member[a - b]:
                    ok = False
                    break
            out[i] = ok
        return out

    @numba.njit(cache=True)
    def _truncated_product_nb(ka, va, kb, vb, offs, masks, strides, dims, bias, guard, p, rank):
        acc = np.zeros(rank, dtype=np.int64)
        nv = offs.size
        for i in range(ka.size):
            a = ka[i]
            x = va[i]
            for j in range(kb.size):
                s = a + kb[j]
                if (s + bias) & guard:
                    continue
                idx = 0
                for v in range(nv):
                    idx += ((s >> offs[v]) & masks[v]) * strides[v]
                acc[idx] += x * vb[j]
        n = 0
        for i in range(rank):
            acc[i] %= p
            if acc[i] != 0:
                n += 1
        keys = np.zeros(n, dtype=np.int64)
        vals = np.zeros(n, dtype=np.int64)
        k = 0
        for i in range(rank):
            if acc[i] != 0:
                key = 0
                for v in range(nv):
                    key += ((i // strides[v]) % dims[v]) << offs[v]
                keys[k] = key
                vals[k] = acc[i]
                k += 1
        return keys, vals


# ---------------------------------------------------------------------------
# dispatch


def semigroup_membership(gens, bound: int) -> np.ndarray:
    """Boolean table ``t`` with ``t[a]`` true iff ``a`` is a sum of ``gens``."""
    g = np.asarray(sorted(set(int(x) for x in gens)), dtype=np.int64)
    if BACKEND == "numba":
        return _membership_nb(g, int(bound))
    return _membership_np(g, int(bound))


def series_quotient(num_degrees, den_degrees, n_terms: int) -> np.ndarray:
    """Coefficients of prod(1 - t^a) / prod(1 - t^b) below ``t^n_terms``."""
    num = np.asarray(list(num_degrees), dtype=np.int64)
    den = np.asarray(list(den_degrees), dtype=np.int64)
    if (num <= 0).any() or (den <= 0).any():
        raise ValueError("degrees must be positive")
    if BACKEND == "numba":
        return _series_quotient_nb(num, den, int(n_terms))
    return _series_quotient_np(num, den, int(n_terms))


def rank_mod_p(mat, p: int) -> int:
    m = np.asarray(mat, dtype=np.int64)
    if m.size == 0:
        return 0
    if BACKEND == "numba":
        return int(_rank_mod_p_nb(m, int(p)))
    return _rank_mod_p_np(m, int(p))


def minimal_mask(member: np.ndarray, candidates) -> np.ndarray:
    cand = np.asarray(list(candidates), dtype=np.int64)
    if BACKEND == "numba":
        return _minimal_mask_nb(member, cand)
    return _minimal_mask_np(member, cand)


def truncated_product(ka, va, kb, vb, layout, p: int):
    """Product of two packed-monomial polynomials in a monomial quotient.

    ``layout`` is ``(offs, masks, strides, dims, bias, guard, rank)`` as
    built by the presentation; terms whose exponents overflow are dropped.
    """
    offs, masks, strides, dims, bias, guard, rank = layout
    fn = _truncated_product_nb if BACKEND == "numba" else _truncated_product_np
    return fn(ka, va, kb, vb, offs, masks, strides, dims, bias, guard, int(p), int(rank))
