"""Kernel backend selection.

The hot loops in :mod:`tfgamma.kernels` exist twice: a numba ``@njit`` version
and a pure-numpy version.  ``TFGAMMA_BACKEND`` picks one at import time
(``numba``, the default when numba imports, or ``numpy``).
"""

import os

_requested = os.environ.get("TFGAMMA_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"TFGAMMA_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

BACKEND = "numba" if (_requested == "numba" and HAVE_NUMBA) else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity otherwise."""
    if HAVE_NUMBA:
        import numba

        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn
