import numpy as np
import pytest

from pncurves import kernels
from pncurves.exactalg import monomial_ring, random_element

pytestmark = pytest.mark.skipif(not kernels.HAVE_NUMBA, reason="numba not importable")


@pytest.fixture
def both():
    saved = kernels.get_backend()

    def run(fn, *args):
        kernels.set_backend("numba")
        a = fn(*args)
        kernels.set_backend("numpy")
        b = fn(*args)
        kernels.set_backend(saved)
        return a, b

    yield run
    kernels.set_backend(saved)


@pytest.mark.parametrize("gens", [[2, 3], [6, 8, 9], [7, 11, 13], [2401, 2058, 2352, 2394, 2400]])
def test_membership_backends_agree(both, gens):
    a, b = both(kernels.semigroup_membership, gens, 3 * max(gens) + 50)
    assert np.array_equal(a, b)


def test_series_backends_agree(both):
    a, b = both(kernels.series_quotient, [18, 24], [9, 8, 6], 200)
    assert np.array_equal(a, b)


def test_rank_backends_agree(both, rng):
    for p in (2, 3, 7):
        m = np.array([[rng.randrange(p) for _ in range(9)] for _ in range(7)], dtype=np.int64)
        m[3] = (m[1] + 2 * m[2]) % p
        a, b = both(kernels.rank_mod_p, m, p)
        assert a == b <= 6


def test_minimal_mask_backends_agree(both):
    member = kernels.semigroup_membership([6, 8, 9, 12, 14, 19], 100)
    a, b = both(kernels.minimal_mask, member, [6, 8, 9, 12, 14, 19])
    # 12 = 6 + 6 and 14 = 6 + 8 are redundant, 19 is not
    assert a.tolist() == b.tolist() == [True, True, True, False, False, True]


def test_truncated_product_matches_python(rng, monkeypatch):
    from pncurves import exactalg

    R = monomial_ring(3, {"a": 9, "b": 9, "c": 3})
    for backend in ("numba", "numpy"):
        kernels.set_backend(backend)
        for _ in range(5):
            x = random_element(R, rng, density=0.6)
            y = random_element(R, rng, density=0.6)
            monkeypatch.setattr(exactalg, "KERNEL_MIN_PAIRS", 1)
            fast = x * y
            monkeypatch.setattr(exactalg, "KERNEL_MIN_PAIRS", 10**12)
            slow = x * y
            assert fast == slow
    kernels.set_backend("numba")


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.set_backend("cuda")
