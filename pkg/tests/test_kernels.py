import random

import numpy as np
import pytest

from suffixsweep import kernels
from suffixsweep.kernels import _ref


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")
    assert "python" in kernels.backends()


def test_osa_known_values():
    assert kernels.osa_distance([], []) == 0
    assert kernels.osa_distance([1, 2, 3], [1, 2, 3]) == 0
    assert kernels.osa_distance([1, 2], [2, 1]) == 1
    assert kernels.osa_distance([1], [1, 2, 3]) == 2


def test_count_active_inclusive_bounds_and_open_ends():
    starts = np.array([10, 20, 30], dtype=np.int64)
    ends = np.array([15, kernels.OPEN_END, 35], dtype=np.int64)
    assert kernels.count_active(starts, ends, 10) == 1
    assert kernels.count_active(starts, ends, 15) == 1
    assert kernels.count_active(starts, ends, 16) == 0
    assert kernels.count_active(starts, ends, 10**9) == 1  # the open one


@pytest.mark.skipif(
    "cython" not in kernels.backends(), reason="compiled backend not built"
)
def test_backends_agree_on_random_inputs():
    fast = kernels.backends()["cython"]
    rng = random.Random(7)
    for _ in range(300):
        a = np.array([rng.randrange(5) for _ in range(rng.randrange(15))], dtype=np.int64)
        b = np.array([rng.randrange(5) for _ in range(rng.randrange(15))], dtype=np.int64)
        assert fast.osa_distance(a, b) == _ref.osa_distance(a, b)
    for _ in range(100):
        n = rng.randrange(1, 40)
        starts = np.array(sorted(rng.randrange(1000) for _ in range(n)), dtype=np.int64)
        ends = starts + np.array([rng.randrange(50) for _ in range(n)], dtype=np.int64)
        t = rng.randrange(1100)
        assert fast.count_active(starts, ends, t) == _ref.count_active(starts, ends, t)


def test_wrapper_accepts_plain_lists():
    assert kernels.osa_distance([1, 2, 3], [1, 3, 2]) == 1
    assert kernels.count_active([1, 2], [5, 6], 3) == 2
