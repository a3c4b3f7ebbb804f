"""Kernel backend selection.

The compiled extension is preferred when importable; set CORRDYN_PURE_PY=1
to force the pure-Python backend.  Both backends implement the same
algorithms with the same operation order and produce identical results
(see benchmarks/bench_kernels.py, which checks this).
"""

from __future__ import annotations

import os

if os.environ.get("CORRDYN_PURE_PY") == "1":
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels_cy as kernels  # type: ignore[no-redef]
    except ImportError:
        from . import _kernels_py as kernels  # type: ignore[no-redef]

BACKEND = kernels.BACKEND_NAME
