"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy fallback.
Set ``SRBB_BACKEND=python`` to force the fallback.
"""
import os

from . import _fallback

BACKEND = "python"
kernels = _fallback

if os.environ.get("SRBB_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        kernels = _compiled
        BACKEND = "cython"


def get(name=None):
    """Return the kernel module called ``name`` ('cython' or 'python'), or the active one."""
    if name is None:
        return kernels
    if name == "python":
        return _fallback
    if name == "cython":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")
