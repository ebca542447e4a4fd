"""Derivative-free optimization helpers shared by the bound and DP modules."""
from __future__ import annotations

import math

import numpy as np
from scipy.optimize import minimize

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(f, lo: float, hi: float, tol: float = 1e-10,
                       coarse: int = 64) -> tuple[float, float]:
    """Maximize a unimodal-ish scalar function on [lo, hi].

    A coarse scan first brackets the best region (guards against multiple
    local maxima), then golden-section search refines to |interval| <= tol.
    Returns (argmax, max).
    """
    xs = np.linspace(lo, hi, coarse + 1)
    vals = np.array([f(x) for x in xs])
    k = int(np.argmax(vals))
    a = xs[max(k - 1, 0)]
    b = xs[min(k + 1, coarse)]
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def nelder_mead_max(f, x0: np.ndarray, lo: float = 0.0, hi: float = 1.0,
                    xatol: float = 1e-9, fatol: float = 1e-11,
                    maxiter: int | None = None) -> tuple[np.ndarray, float]:
    """Maximize f over a box [lo, hi]^d with Nelder-Mead.

    Iterates are clipped into the box before evaluation, so f never sees
    out-of-range coordinates. Returns (argmax, max).
    """
    x0 = np.asarray(x0, dtype=float)

    def neg(x):
        return -f(np.clip(x, lo, hi))

    res = minimize(neg, x0, method="Nelder-Mead",
                   options={"xatol": xatol, "fatol": fatol,
                            "maxiter": maxiter, "adaptive": x0.size > 2})
    x = np.clip(res.x, lo, hi)
    return x, f(x)


def grid_axes(step: float) -> np.ndarray:
    """A [0, 1] grid with the given step, always including both endpoints."""
    n = max(int(round(1.0 / step)), 1)
    return np.linspace(0.0, 1.0, n + 1)
