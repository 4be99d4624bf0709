"""Pure-numpy reference implementations of the scoring hot loops."""

from __future__ import annotations

import numpy as np


def mean_pairwise_abs(values: np.ndarray) -> float:
    """Mean of |x_i - x_j| over ordered pairs i != j, O(m log m).

    With x sorted, sum_{i<j} (x_j - x_i) telescopes into a weighted sum.
    """
    x = np.sort(np.asarray(values, dtype=float))
    m = len(x)
    if m < 2:
        return 0.0
    weights = 2.0 * np.arange(m) - (m - 1)
    return 2.0 * float(np.dot(weights, x)) / (m * (m - 1))


def band_depth(curves: np.ndarray) -> np.ndarray:
    """Modified band depth of each curve within the sample.

    For every time point, a curve is covered by a pair when it lies inside the
    pair's closed pointwise band; the depth is the fraction of covering pairs
    averaged over time points.  Pairs strictly below or strictly above the
    curve are the only non-covering ones, so per time point the covered count
    is C(n,2) - C(below,2) - C(above,2).
    """
    curves = np.asarray(curves, dtype=float)
    n, n_time = curves.shape
    if n < 2:
        return np.ones(n)
    total_pairs = n * (n - 1) / 2.0
    depth = np.zeros(n)
    for t in range(n_time):
        col = curves[:, t]
        order = np.sort(col)
        below = np.searchsorted(order, col, side="left")
        above = n - np.searchsorted(order, col, side="right")
        covered = total_pairs - below * (below - 1) / 2.0 - above * (above - 1) / 2.0
        depth += covered
    return depth / (n_time * total_pairs)
