"""Select the kernel implementation at import time.

The compiled extension is preferred. Set ``OIMLAB_PURE_PYTHON=1`` to force
the numpy fallback (useful for debugging and for the benchmark).
"""
import os

from . import _fallback

if os.environ.get("OIMLAB_PURE_PYTHON"):
    kernels = _fallback
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        kernels = _fallback

NAME = kernels.NAME


def available():
    """Return every importable backend keyed by name."""
    found = {"python": _fallback}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        found["cython"] = _kernels
    return found
