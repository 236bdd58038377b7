"""Kernel backend selection.

The compiled extension (``trendscan._native``) is preferred; the
vectorized NumPy implementation (``trendscan._kernel_py``) is the
fallback and the cross-check reference.  Selection happens at import and
can be forced with the TRENDSCAN_BACKEND environment variable
("native" or "python") or per call via the ``backend=`` arguments.
"""
from __future__ import annotations

import os

from . import _kernel_py

try:
    from . import _native
except ImportError:  # extension not built; the pure path is feature-complete
    _native = None

_BACKENDS = {"python": _kernel_py}
if _native is not None:
    _BACKENDS["native"] = _native


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def default_backend() -> str:
    env = os.environ.get("TRENDSCAN_BACKEND")
    if env:
        if env not in _BACKENDS:
            raise ValueError(
                f"TRENDSCAN_BACKEND={env!r} not available; "
                f"choose from {sorted(_BACKENDS)}"
            )
        return env
    return "native" if "native" in _BACKENDS else "python"


def get_backend(name: str | None = None):
    """Return the kernel module for ``name`` (default: best available)."""
    if name is None:
        name = default_backend()
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"unknown backend {name!r}; available: {sorted(_BACKENDS)}"
        ) from None
