"""Compiled sweep over sorted candidate thresholds for the model-tree split search.

For one split variable the rows of a node are visited in sorted order while
the Gram matrix X'X, X'y and y'y of each side are accumulated. At every
boundary between distinct values the residual sum of squares of a least
squares fit on each side follows from a Cholesky factorisation that skips
linearly dependent columns. The right side is accumulated in its own reverse
pass so no moments are obtained by subtraction.
"""
from __future__ import annotations

import numpy as np
from numba import njit

PIVOT_TOL = 1e-9


@njit(cache=True, nogil=True)
def _rss_from_moments(M, b, c, tol, L, z):
    p = M.shape[0]
    proj = 0.0
    for j in range(p):
        mjj = M[j, j]
        d = mjj
        for k in range(j):
            d -= L[j, k] * L[j, k]
        if mjj <= 0.0 or d <= tol * mjj:
            # dependent column: zero it so later columns ignore it
            z[j] = 0.0
            for i in range(j, p):
                L[i, j] = 0.0
            continue
        ljj = np.sqrt(d)
        L[j, j] = ljj
        for i in range(j + 1, p):
            s = M[j, i]
            for k in range(j):
                s -= L[i, k] * L[j, k]
            L[i, j] = s / ljj
        s = b[j]
        for k in range(j):
            s -= L[j, k] * z[k]
        z[j] = s / ljj
        proj += z[j] * z[j]
    r = c - proj
    if r < 0.0:
        r = 0.0
    return r


@njit(cache=True, nogil=True)
def _accumulate(M, b, X, y, row, mu, muy):
    p = X.shape[1]
    yi = y[row] - muy
    for a in range(p):
        xa = X[row, a] - mu[a]
        b[a] += xa * yi
        for c in range(a, p):
            M[a, c] += xa * (X[row, c] - mu[c])
    return yi * yi


@njit(cache=True, nogil=True)
def node_rss(X, y, rows, mu, muy):
    p = X.shape[1]
    M = np.zeros((p, p))
    b = np.zeros(p)
    c = 0.0
    for i in range(rows.shape[0]):
        c += _accumulate(M, b, X, y, rows[i], mu, muy)
    return _rss_from_moments(M, b, c, PIVOT_TOL, np.zeros((p, p)), np.zeros(p))


@njit(cache=True, nogil=True)
def scan_variable(X, y, v, order, mu, muy, min_leaf):
    """Best (sse, threshold, n_left) for splitting rows ``order`` (sorted by v) at a midpoint.

    Returns (inf, nan, -1) when no threshold leaves at least ``min_leaf``
    rows on both sides. Ties keep the smallest threshold.
    """
    n = order.shape[0]
    p = X.shape[1]
    best = np.inf
    best_thr = np.nan
    best_nl = -1
    if n < 2 * min_leaf:
        return best, best_thr, best_nl
    right = np.full(n, np.inf)
    L = np.zeros((p, p))
    z = np.zeros(p)
    M = np.zeros((p, p))
    b = np.zeros(p)
    c = 0.0
    # right side: rows i+1..n-1 feed right[i]
    for i in range(n - 1, 0, -1):
        c += _accumulate(M, b, X, y, order[i], mu, muy)
        nr = n - i
        if nr < min_leaf:
            continue
        if i < min_leaf:
            break
        if v[order[i]] != v[order[i - 1]]:
            right[i - 1] = _rss_from_moments(M, b, c, PIVOT_TOL, L, z)
    M[:, :] = 0.0
    b[:] = 0.0
    c = 0.0
    for i in range(n - 1):
        c += _accumulate(M, b, X, y, order[i], mu, muy)
        nl = i + 1
        if n - nl < min_leaf:
            break
        if nl < min_leaf:
            continue
        va = v[order[i]]
        vb = v[order[i + 1]]
        if va == vb:
            continue
        total = _rss_from_moments(M, b, c, PIVOT_TOL, L, z) + right[i]
        if total < best:
            best = total
            best_thr = 0.5 * (va + vb)
            if best_thr >= vb:
                best_thr = va
            best_nl = nl
    return best, best_thr, best_nl
