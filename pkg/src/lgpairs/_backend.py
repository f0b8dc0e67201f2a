"""Kernel backend selection.

The compiled Cython extension is preferred when importable; the pure-numpy
module is the fallback. ``LGPAIRS_BACKEND=python`` or ``=compiled`` forces
the choice (the latter raises if the extension is missing, rather than
silently degrading a benchmark)."""

import os

from . import _kernels_py

_requested = os.environ.get("LGPAIRS_BACKEND", "").strip().lower()

if _requested == "python":
    kernels = _kernels_py
elif _requested == "compiled":
    from . import _kernels as kernels  # noqa: F401  (ImportError is the point)
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        kernels = _kernels_py

BACKEND = kernels.BACKEND
laguerre_batch = kernels.laguerre_batch
lg_radial_basis = kernels.lg_radial_basis
