"""Numba availability switch.

Set ``QREKIT_DISABLE_NUMBA=1`` to force the pure-numpy kernels even when numba
is importable. ``QREKIT_NUM_THREADS`` caps the numba thread pool.
"""

from __future__ import annotations

import os

_FALSY = {"", "0", "false", "no", "off"}


def _flag(name: str) -> bool:
    return os.environ.get(name, "").strip().lower() not in _FALSY


try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _flag("QREKIT_DISABLE_NUMBA")


def njit(*args, **kwargs):
    """``numba.njit`` with caching on, or a no-op decorator without numba."""
    if not HAVE_NUMBA:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return numba.njit(*args, **kwargs)


def configure_threads() -> int | None:
    raw = os.environ.get("QREKIT_NUM_THREADS")
    if not raw or not HAVE_NUMBA:
        return None
    n = max(1, min(int(raw), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)
    return n
