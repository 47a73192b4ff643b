"""Pick the kernel implementation at import time.

The compiled extension is used when it was built; setting
``MFODBO_BACKEND=python`` forces the numpy fallback (useful for
benchmarking and for checking that both backends agree).
"""
import os
import warnings

from . import _pykernels

_requested = os.environ.get("MFODBO_BACKEND", "auto").strip().lower()

kernels = _pykernels
if _requested in ("auto", "cython", ""):
    try:
        from . import _kernels as kernels  # noqa: F811
    except ImportError:
        if _requested == "cython":
            warnings.warn("compiled kernels unavailable; using the numpy fallback", RuntimeWarning)
        kernels = _pykernels
elif _requested != "python":
    raise ImportError(f"unknown MFODBO_BACKEND {_requested!r}; use auto, cython or python")

BACKEND = kernels.NAME


def compiled_kernels():
    """The compiled module, or ``None`` when the extension is not built."""
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels
