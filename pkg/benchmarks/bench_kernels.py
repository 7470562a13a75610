"""Compare the numba kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

The first numba call of each kernel is timed separately (JIT compile).
Outputs of both backends are compared before any timing is reported.
"""

from __future__ import annotations

import argparse
import random
import time

import numpy as np

from pncurves import kernels
from pncurves.exactalg import monomial_ring, random_element
from pncurves.numsemigroup import gamma_pn_generators


def workloads(rng):
    gens = gamma_pn_generators(7, 4)
    bound = 3 * 52822
    member = kernels.semigroup_membership(gens, bound)
    mat = np.array([[rng.randrange(5) for _ in range(300)] for _ in range(300)], dtype=np.int64)
    R = monomial_ring(3, {"a": 27, "b": 9, "c": 9})
    x = random_element(R, rng, density=0.3)
    y = random_element(R, rng, density=0.3)
    layout = R._kernel_layout

    def product():
        ka, va = np.array(list(x.terms), dtype=np.int64), np.array(list(x.terms.values()), dtype=np.int64)
        kb, vb = np.array(list(y.terms), dtype=np.int64), np.array(list(y.terms.values()), dtype=np.int64)
        keys, vals = kernels.truncated_product(ka, va, kb, vb, layout, 3)
        return dict(zip(np.asarray(keys).tolist(), np.asarray(vals).tolist()))

    return {
        "semigroup_membership (7,4)": lambda: kernels.semigroup_membership(gens, bound),
        "minimal_mask (7,4)": lambda: kernels.minimal_mask(member, np.asarray(sorted(gens), dtype=np.int64)),
        "series_quotient (7,2)": lambda: kernels.series_quotient([7 * (49 - 1), 7 * (49 - 7)], [49, 48, 42], 4000),
        "rank_mod_p 300x300 F_5": lambda: kernels.rank_mod_p(mat, 5),
        "truncated_product rank 2187": product,
    }


def _same(a, b):
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    return a == b


def timed(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=20240601)
    args = ap.parse_args(argv)
    if not kernels.HAVE_NUMBA:
        print("numba is not importable; nothing to compare")
        return 0
    rng = random.Random(args.seed)
    print(f"{'kernel':<30} {'jit(s)':>8} {'numba(s)':>10} {'numpy(s)':>10} {'speedup':>8}")
    for name, fn in workloads(rng).items():
        kernels.set_backend("numba")
        t0 = time.perf_counter()
        ref = fn()
        jit = time.perf_counter() - t0
        t_nb = timed(fn, args.repeat)
        kernels.set_backend("numpy")
        out = fn()
        t_np = timed(fn, args.repeat)
        if not _same(ref, out):
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:<30} {jit:>8.3f} {t_nb:>10.5f} {t_np:>10.5f} {t_np / t_nb:>7.1f}x")
    kernels.set_backend("numba")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
