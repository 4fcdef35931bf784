"""Numba switch.

Set ``OA_SPACEFILL_NO_JIT=1`` to force the pure-numpy code paths. Both paths
produce bit-identical results; the numba one is just faster.
"""
import os
import warnings

warnings.filterwarnings("ignore", message="The TBB threading layer")

try:
    import numba
    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAS_NUMBA = False

USE_JIT = HAS_NUMBA and os.environ.get("OA_SPACEFILL_NO_JIT", "0").lower() not in ("1", "true", "yes")


def njit(*args, **kwargs):
    """``numba.njit`` with caching on, or a no-op decorator without numba."""
    kwargs.setdefault("cache", True)
    if HAS_NUMBA:
        return numba.njit(*args, **kwargs)
    if args and callable(args[0]):
        return args[0]
    return lambda f: f


if HAS_NUMBA:
    prange = numba.prange
else:  # pragma: no cover
    prange = range


def set_threads(n):
    """Cap the numba worker pool. Outputs do not depend on the thread count."""
    if HAS_NUMBA and n:
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
