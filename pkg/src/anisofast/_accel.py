"""Kernel acceleration shim.

Compiled kernels are used when numba is importable and the environment
variable ``ANISOFAST_NO_NUMBA`` is unset (or falsy); otherwise the pure
numpy implementations take over. Both paths perform the same floating
point operations in the same order.
"""

from __future__ import annotations

import os

__all__ = ["USING_NUMBA", "njit", "set_threads"]


def _flag_disabled() -> bool:
    val = os.environ.get("ANISOFAST_NO_NUMBA", "").strip().lower()
    return val in ("1", "true", "yes", "on")


USING_NUMBA = False
if not _flag_disabled():
    try:
        from numba import njit as _numba_njit

        USING_NUMBA = True
    except ImportError:  # pragma: no cover - depends on environment
        USING_NUMBA = False


if USING_NUMBA:

    def njit(func=None, **kwargs):
        kwargs.setdefault("cache", True)
        if func is None:
            return _numba_njit(**kwargs)
        return _numba_njit(**kwargs)(func)

else:

    def njit(func=None, **kwargs):
        # identity decorator; the numpy path never calls these functions
        if func is None:
            return lambda f: f
        return func


def set_threads(count: int) -> None:
    """Set the numba thread count. No-op on the numpy path."""
    if count < 1:
        raise ValueError(f"thread count must be >= 1, got {count}")
    if USING_NUMBA:
        import numba

        numba.set_num_threads(min(count, numba.config.NUMBA_NUM_THREADS))
