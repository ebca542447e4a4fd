"""Pure-numpy implementation of the hot DP kernel."""
from __future__ import annotations

import numpy as np

BACKEND = "numpy"


def bellman_sweep(v, reward, py, idx, wgt):
    """One relative-value-iteration sweep over all grid nodes.

    v      : (N,) current value array
    reward : (N, M) per-node, per-action expected reward
    py     : (N, M, Y) output probabilities
    idx    : (N, M, Y, K) int32 grid indices of interpolation vertices
    wgt    : (N, M, Y, K) interpolation weights (convex per (n, m, y))

    Returns (v_next, best_action) where v_next[n] = max_m of
    reward[n, m] + sum_y py[n, m, y] * sum_k wgt * v[idx].
    """
    interp = np.einsum("nmyk,nmyk->nmy", wgt, v[idx])
    q = reward + np.einsum("nmy,nmy->nm", py, interp)
    best = np.argmax(q, axis=1)
    return q[np.arange(q.shape[0]), best], best.astype(np.int64)
