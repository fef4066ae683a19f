"""Kernel backend selection.

Imports the compiled Cython kernels when they are available and falls back
to the pure-numpy implementations otherwise. Set QFORECAST_PURE_PYTHON=1
to force the fallback, e.g. for benchmarking or debugging.
"""

import os

from . import _kernels_py

if os.environ.get("QFORECAST_PURE_PYTHON"):
    kernels = _kernels_py
    COMPILED = False
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]
        COMPILED = True
    except ImportError:
        kernels = _kernels_py
        COMPILED = False

BACKEND_NAME = "compiled" if COMPILED else "python"

apply_single_qubit = kernels.apply_single_qubit
apply_cnot = kernels.apply_cnot
