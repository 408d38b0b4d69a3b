"""Optional numba acceleration.

Set ``BIHILB_NO_NUMBA=1`` to run the pure-numpy path (useful for debugging
and for the kernel benchmark).
"""
import os

USE_NUMBA = os.environ.get("BIHILB_NO_NUMBA", "0").lower() not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        from numba import njit as _njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False

if USE_NUMBA:

    def njit(fn=None, **kw):
        kw.setdefault("cache", True)
        if fn is None:
            return lambda f: _njit(**kw)(f)
        return _njit(**kw)(fn)

else:

    def njit(fn=None, **kw):
        if fn is None:
            return lambda f: f
        return fn
