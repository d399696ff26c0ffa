"""Kernel backend selection.

``SEFPP_BACKEND=numpy`` forces the vectorized numpy kernels; ``numba`` (the
default when numba imports) compiles the loop kernels with ``@njit``.
"""
import logging
import os

__all__ = ["BACKEND", "HAS_NUMBA", "njit", "resolve_backend"]

try:
    import numba

    logging.getLogger("numba").setLevel(logging.WARNING)
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba ships with the dev environment
    numba = None
    HAS_NUMBA = False


def resolve_backend(value=None):
    """Map an env-var style string onto ``"numba"`` or ``"numpy"``."""
    if value is None:
        value = os.environ.get("SEFPP_BACKEND", "")
    value = value.strip().lower()
    if value in ("", "auto"):
        return "numba" if HAS_NUMBA else "numpy"
    if value not in ("numba", "numpy"):
        raise ValueError(f"SEFPP_BACKEND must be 'numba' or 'numpy', got {value!r}")
    if value == "numba" and not HAS_NUMBA:
        raise ImportError("SEFPP_BACKEND=numba but numba is not installed")
    return value


BACKEND = resolve_backend()


def njit(func):
    """``numba.njit(cache=True)`` when numba is importable, identity otherwise."""
    if numba is None:
        return func
    return numba.njit(cache=True)(func)
