"""Kernel backend selection.

The compiled extension is preferred; set ``SEPFACT_PURE_PYTHON=1`` to force
the numpy fallback.  ``BACKEND`` names the implementation in use.
"""
import os

import numpy as np

from . import _kernels_py
from .errors import DimensionError

if os.environ.get("SEPFACT_PURE_PYTHON"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"



def rank1_search(basis, m: int, n: int, starts, max_iter: int = 2000, tol: float = 1e-12):
    """Alternating rank-one projection inside ``span(basis)`` from each start.

    ``basis`` is ``mn x d`` with orthonormal columns and ``starts`` is
    ``R x d`` (coefficients in that basis).  Returns the left factors
    (``R x m``), right factors (``R x n``), final residuals and iteration
    counts.
    """
    basis = np.ascontiguousarray(basis, dtype=np.complex128)
    starts = np.ascontiguousarray(starts, dtype=np.complex128)
    if basis.ndim != 2 or basis.shape[0] != m * n:
        raise DimensionError(f"basis must be {m * n} x d, got {basis.shape}")
    if starts.ndim != 2 or starts.shape[1] != basis.shape[1]:
        raise DimensionError(f"starts must be R x {basis.shape[1]}, got {starts.shape}")
    return _impl.rank1_search(basis, int(m), int(n), starts, int(max_iter), float(tol))

__all__ = ["BACKEND", "rank1_search"]
