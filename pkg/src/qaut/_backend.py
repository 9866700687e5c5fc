"""Kernel backend selection.

The compiled extension is preferred; set ``QAUT_PURE_PYTHON=1`` to force the
fallback (useful for benchmarking and for checking the two agree).
"""

import os

if os.environ.get("QAUT_PURE_PYTHON", "").strip() not in ("", "0"):
    from . import _kernels_py as kernels

    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels

        BACKEND = "compiled"
    except ImportError:  # extension not built
        from . import _kernels_py as kernels

        BACKEND = "python"

__all__ = ["BACKEND", "kernels"]
