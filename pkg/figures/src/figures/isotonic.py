"""Weighted isotonic regression by pool-adjacent-violators."""
from __future__ import annotations

import numpy as np


def isotonic_fit(x, y, weights=None):
    """Monotone nondecreasing least-squares fit of y against x.

    Ties in x are pooled before the PAV pass. Returns (x_sorted, fitted)
    with one entry per distinct x.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d arrays of the same length")
    if x.size == 0:
        raise ValueError("empty input")
    w = np.ones_like(y) if weights is None else np.asarray(weights, float)

    order = np.argsort(x, kind="stable")
    xs, ys, ws = x[order], y[order], w[order]
    # pool exact ties in x into single weighted points
    ux, inverse = np.unique(xs, return_inverse=True)
    wy = np.bincount(inverse, weights=ws * ys)
    ww = np.bincount(inverse, weights=ws)
    means = wy / ww

    # pool-adjacent-violators over blocks [start, value, weight]
    starts, vals, wts = [], [], []
    for k in range(len(ux)):
        starts.append(k)
        vals.append(means[k])
        wts.append(ww[k])
        while len(vals) > 1 and vals[-2] > vals[-1]:
            v = (vals[-2] * wts[-2] + vals[-1] * wts[-1]) / (wts[-2] + wts[-1])
            wts[-2] += wts[-1]
            vals[-2] = v
            starts.pop()
            vals.pop()
            wts.pop()
    fitted = np.empty(len(ux))
    bounds = starts + [len(ux)]
    for v, lo, hi in zip(vals, bounds[:-1], bounds[1:]):
        fitted[lo:hi] = v
    return ux, fitted
