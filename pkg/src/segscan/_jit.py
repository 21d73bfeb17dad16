"""Select the numba or pure-numpy kernel path.

Set ``SEGSCAN_DISABLE_JIT=1`` before import to force the numpy fallback.
The fallback is also used when numba is not importable.
"""

import os

_disabled = os.environ.get("SEGSCAN_DISABLE_JIT", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

NUMBA_AVAILABLE = numba is not None
USE_NUMBA = NUMBA_AVAILABLE and not _disabled


def njit(fn):
    """``numba.njit`` with the options every kernel uses, or a no-op without numba."""
    if not NUMBA_AVAILABLE:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)
