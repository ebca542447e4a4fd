"""Hot numeric kernels: compiled extension when available, numpy otherwise.

Set QBOUND_NO_EXT=1 to force the pure-numpy fallback (used by the parity
tests and the benchmark).
"""
from __future__ import annotations

import os

from . import _fallback

if os.environ.get("QBOUND_NO_EXT"):
    _impl = _fallback
else:
    try:
        from . import _corex as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _fallback

BACKEND = _impl.BACKEND
bellman_sweep = _impl.bellman_sweep

fallback_bellman_sweep = _fallback.bellman_sweep
