"""Selects the compiled integrator kernel, falling back to pure Python.

Set ``FIELDLINE_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
dopri5 = _kernels_py.dopri5

if os.environ.get("FIELDLINE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        dopri5 = _compiled.dopri5
        BACKEND = "cython"

OK = _kernels_py.OK
MAX_STEPS = _kernels_py.MAX_STEPS
STEP_UNDERFLOW = _kernels_py.STEP_UNDERFLOW
BAD_FIELD = _kernels_py.BAD_FIELD
STATUS_TEXT = {
    OK: "ok",
    MAX_STEPS: "max_steps exceeded",
    STEP_UNDERFLOW: "step size underflow",
    BAD_FIELD: "field not finite along the path",
}

__all__ = ["dopri5", "BACKEND", "STATUS_TEXT"]
