"""Numba switch.

Set ``IRREVBOUND_NUMBA=0`` before import to run every kernel as plain
Python/NumPy.  Both paths are importable regardless of the flag so tests and
benchmarks can compare them directly.
"""

import os

_FLAG = os.environ.get("IRREVBOUND_NUMBA", "1").strip().lower()
USE_NUMBA = _FLAG not in ("0", "false", "no", "off")

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    _numba = None
    USE_NUMBA = False


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    if _numba is None:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda func: func
    return _numba.njit(*args, **kwargs)
