"""Hot loops: reduced-form enumeration and Fincke-Pohst short vectors.

The compiled extension is used when it imports; set ``ARBORP_PURE=1`` to force
the pure-Python fallback.  Both implementations return identical results.
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("ARBORP_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

# gram entries larger than this may overflow the compiled int64 arithmetic
_SAFE = 1 << 40


def _fits(gram, bound) -> bool:
    if bound > _SAFE:
        return False
    return all(abs(x) < _SAFE for row in gram for x in row)


def reduced_forms(d: int) -> list[tuple[int, int, int]]:
    if _impl is not _kernels_py and -d < _SAFE:
        return _impl.reduced_forms(d)
    return _kernels_py.reduced_forms(d)


def short_vectors(gram, bound: int):
    impl = _impl if _fits(gram, bound) else _kernels_py
    return impl.short_vectors([[int(x) for x in row] for row in gram], int(bound))


def theta_counts(gram, bound: int) -> list[int]:
    impl = _impl if _fits(gram, bound) else _kernels_py
    return impl.theta_counts([[int(x) for x in row] for row in gram], int(bound))
