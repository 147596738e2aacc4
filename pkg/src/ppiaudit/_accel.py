"""Numba availability and backend selection.

Set ``PPIAUDIT_NO_NUMBA=1`` to force the pure-numpy / pure-Python kernels.
"""

import os
import warnings

try:
    import numba
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


def _env_disabled() -> bool:
    return os.environ.get("PPIAUDIT_NO_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}


USE_NUMBA = HAS_NUMBA and not _env_disabled()


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


def set_threads(n: int | None) -> int:
    """Clamp and apply a numba thread count; returns the count in effect."""
    if not HAS_NUMBA:
        return 1
    limit = numba.config.NUMBA_NUM_THREADS
    if n is None or n <= 0:
        n = limit
    n = max(1, min(int(n), limit))
    with warnings.catch_warnings():
        # threading-layer probing may warn about an old TBB; the workqueue layer is fine
        warnings.simplefilter("ignore")
        numba.set_num_threads(n)
    return n
