"""Pick the compiled kernels when available, else the NumPy fallback.

Set OBETHERMO_PURE_PYTHON=1 to force the fallback.
"""
import os

if os.environ.get("OBETHERMO_PURE_PYTHON", "") not in ("", "0"):
    from ._pykernels import jc_rk4, rk4_linear
    BACKEND = "python"
else:
    try:
        from ._ckernels import jc_rk4, rk4_linear
        BACKEND = "cython"
    except ImportError:
        from ._pykernels import jc_rk4, rk4_linear
        BACKEND = "python"

__all__ = ["rk4_linear", "jc_rk4", "BACKEND"]
