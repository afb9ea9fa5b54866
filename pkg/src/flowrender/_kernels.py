"""Hot loops of the DTW recurrence, compiled with numba when available.

Set ``FLOWRENDER_DISABLE_NUMBA=1`` to force the pure-numpy path. Both
paths evaluate the same recurrence with the same operation order, so
their results agree bit for bit.
"""

import os

import numpy as np

_disabled = os.environ.get("FLOWRENDER_DISABLE_NUMBA", "").lower() in ("1", "true", "yes")

try:
    if _disabled:
        raise ImportError
    from numba import njit
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def dtw_accumulate_numpy(cost):
    """Accumulated-cost table padded with an inf border, shape (n+1, m+1).

    Cells on each anti-diagonal are independent, so each diagonal is one
    vectorised update.
    """
    n, m = cost.shape
    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    for d in range(n + m - 1):
        i = np.arange(max(0, d - m + 1), min(d, n - 1) + 1)
        j = d - i
        best = np.minimum(np.minimum(acc[i, j], acc[i, j + 1]), acc[i + 1, j])
        acc[i + 1, j + 1] = cost[i, j] + best
    return acc


def dtw_backtrack_numpy(acc):
    """Optimal path from the padded table; ties prefer diagonal, then vertical."""
    i, j = acc.shape[0] - 2, acc.shape[1] - 2
    path = [(i, j)]
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            diag, vert, horiz = acc[i, j], acc[i, j + 1], acc[i + 1, j]
            if diag <= vert and diag <= horiz:
                i -= 1
                j -= 1
            elif vert <= horiz:
                i -= 1
            else:
                j -= 1
        path.append((i, j))
    path.reverse()
    return np.array(path, dtype=np.int64)


if HAVE_NUMBA:

    @njit(cache=True)
    def dtw_accumulate_numba(cost):
        n, m = cost.shape
        acc = np.full((n + 1, m + 1), np.inf)
        acc[0, 0] = 0.0
        for i in range(n):
            for j in range(m):
                best = min(min(acc[i, j], acc[i, j + 1]), acc[i + 1, j])
                acc[i + 1, j + 1] = cost[i, j] + best
        return acc

    @njit(cache=True)
    def dtw_backtrack_numba(acc):
        i = acc.shape[0] - 2
        j = acc.shape[1] - 2
        out = np.empty((i + j + 1, 2), dtype=np.int64)
        k = 0
        out[k, 0] = i
        out[k, 1] = j
        while i > 0 or j > 0:
            if i == 0:
                j -= 1
            elif j == 0:
                i -= 1
            else:
                diag = acc[i, j]
                vert = acc[i, j + 1]
                horiz = acc[i + 1, j]
                if diag <= vert and diag <= horiz:
                    i -= 1
                    j -= 1
                elif vert <= horiz:
                    i -= 1
                else:
                    j -= 1
            k += 1
            out[k, 0] = i
            out[k, 1] = j
        return out[k::-1].copy()

    dtw_accumulate = dtw_accumulate_numba
    dtw_backtrack = dtw_backtrack_numba
else:
    dtw_accumulate = dtw_accumulate_numpy
    dtw_backtrack = dtw_backtrack_numpy
