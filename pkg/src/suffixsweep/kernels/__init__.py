"""Hot kernels with a compiled core and a pure-Python fallback.

The compiled extension is built from ``_fast.pyx`` at install time; when it is
missing (no compiler, SUFFIXSWEEP_PURE=1) the reference implementations from
``_ref`` are used instead.  ``BACKEND`` reports which one is active.
"""

import numpy as np

from ._ref import OPEN_END

try:
    from . import _fast as _impl

    BACKEND = "cython"
except ImportError:  # pragma: no cover - depends on the build environment
    from . import _ref as _impl

    BACKEND = "python"


def osa_distance(a, b) -> int:
    """Optimal-string-alignment edit distance between two integer sequences."""
    a = np.ascontiguousarray(a, dtype=np.int64)
    b = np.ascontiguousarray(b, dtype=np.int64)
    return int(_impl.osa_distance(a, b))


def count_active(starts, ends, t) -> int:
    """Count intervals with start <= t <= end; OPEN_END marks a missing end."""
    starts = np.ascontiguousarray(starts, dtype=np.int64)
    ends = np.ascontiguousarray(ends, dtype=np.int64)
    return int(_impl.count_active(starts, ends, int(t)))


def backends():
    """Return {name: module} of all importable kernel backends (for benchmarks)."""
    from . import _ref

    found = {"python": _ref}
    try:
        from . import _fast

        found["cython"] = _fast
    except ImportError:  # pragma: no cover
        pass
    return found
