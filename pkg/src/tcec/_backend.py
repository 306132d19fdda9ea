"""Select compiled or pure-Python kernels at import time.

Set ``TCEC_PURE_PYTHON=1`` to force the fallback even when the extension
is importable.
"""
import os

from . import _pykernels

pure = _pykernels

if os.environ.get("TCEC_PURE_PYTHON", "") not in ("", "0"):
    compiled = None
else:
    try:
        from . import _kernels as compiled
    except ImportError:
        compiled = None

kernels = compiled if compiled is not None else pure
BACKEND = "cython" if compiled is not None else "python"

WALK_SIMPLE = _pykernels.WALK_SIMPLE
WALK_DEGREE_WEIGHTED = _pykernels.WALK_DEGREE_WEIGHTED
WALK_METROPOLIS = _pykernels.WALK_METROPOLIS
