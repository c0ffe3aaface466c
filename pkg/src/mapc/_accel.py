"""Optional numba acceleration.

Set ``MAPC_NUMBA=0`` in the environment before import to force the pure
numpy code paths (also used automatically when numba is missing).
"""
import os

_flag = os.environ.get("MAPC_NUMBA", "1").strip().lower()
_wanted = _flag not in ("0", "false", "no", "off")

try:
    if not _wanted:
        raise ImportError("numba disabled by MAPC_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f


USE_NUMBA = HAVE_NUMBA
