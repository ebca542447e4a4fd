"""Entropy helpers. All entropies are in bits (log base 2), with 0*log(0) = 0."""
from __future__ import annotations

import numpy as np

LOG2 = np.log(2.0)


def xlog2x(p):
    """Elementwise -p*log2(p) with the 0*log(0)=0 convention."""
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    mask = p > 0.0
    out[mask] = -p[mask] * np.log2(p[mask])
    return out


def entropy_bits(p, axis=-1):
    """Shannon entropy of a distribution (or batch of distributions) in bits."""
    return np.sum(xlog2x(p), axis=axis)


def h2(a):
    """Binary entropy H2(a)."""
    a = np.asarray(a, dtype=float)
    return xlog2x(a) + xlog2x(1.0 - a)


def h3(a1, a2):
    """Ternary entropy H3(a1, a2) of the distribution (a1, a2, 1-a1-a2)."""
    a1 = np.asarray(a1, dtype=float)
    a2 = np.asarray(a2, dtype=float)
    return xlog2x(a1) + xlog2x(a2) + xlog2x(1.0 - a1 - a2)


def h4(a1, a2, a3):
    """Quaternary entropy of (a1, a2, a3, 1-a1-a2-a3)."""
    a1 = np.asarray(a1, dtype=float)
    a2 = np.asarray(a2, dtype=float)
    a3 = np.asarray(a3, dtype=float)
    return xlog2x(a1) + xlog2x(a2) + xlog2x(a3) + xlog2x(1.0 - a1 - a2 - a3)
