"""Kernel backend selection.

The compiled extension ``markerdec._speedups`` is preferred when it imported
cleanly; otherwise the pure numpy twins take over. Setting the environment
variable ``MARKERDEC_PURE`` (to anything non-empty) forces the numpy path,
which is what the backend-parity tests and benchmarks rely on.
"""
from __future__ import annotations

import os

from . import _kernels_np
from ._kernels_np import SPA_CLAMP, ZeroMassError

if os.environ.get("MARKERDEC_PURE"):
    _impl = _kernels_np
    BACKEND = "numpy"
else:
    try:
        from . import _speedups as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_np
        BACKEND = "numpy"

drift_forward_backward = _impl.drift_forward_backward
drift_posteriors = _impl.drift_posteriors
spa_decode = _impl.spa_decode
viterbi_57 = _impl.viterbi_57

__all__ = [
    "BACKEND",
    "SPA_CLAMP",
    "ZeroMassError",
    "drift_forward_backward",
    "drift_posteriors",
    "spa_decode",
    "viterbi_57",
]
