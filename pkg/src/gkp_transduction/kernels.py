"""Kernel selection: the compiled extension when built, numpy otherwise.

Set ``GKP_TRANSDUCTION_PURE=1`` to force the numpy path.
"""

import os

from . import _kernels_py

if os.environ.get("GKP_TRANSDUCTION_PURE"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "python" if _impl is _kernels_py else "compiled"

hermite_table = _impl.hermite_table
