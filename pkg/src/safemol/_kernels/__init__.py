"""Hot loops with a compiled and a pure-Python implementation.

The compiled module is used when it imports; setting ``SAFEMOL_PURE_PYTHON=1``
forces the fallback (handy for debugging and for the backend benchmark).
"""
from __future__ import annotations

import os

from safemol._kernels import _pykernels

BACKEND = "python"
if os.environ.get("SAFEMOL_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from safemol._kernels import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
else:
    _impl = _pykernels

refine_ranks = _impl.refine_ranks
pairwise_tanimoto_sum = _impl.pairwise_tanimoto_sum

__all__ = ["BACKEND", "refine_ranks", "pairwise_tanimoto_sum"]
