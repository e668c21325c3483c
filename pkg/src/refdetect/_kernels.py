"""Sparse weighted-Jaccard kernels.

Entity weight vectors are stored as CSR rows with token ids sorted
ascending. For each requested (left, right) row pair the kernels return

* the sum over tokens of ``min(w_left, w_right)``
* the sum over tokens of ``max(w_left, w_right)``
* the sum of ``w_left``

All three sums run in ascending token-id order. The numba and numpy paths
add the same values in the same order, so their results are bit-identical.

Set ``REFDETECT_DISABLE_NUMBA=1`` to force the numpy path.
"""
from __future__ import annotations

import os

import numpy as np

DISABLE_ENV = "REFDETECT_DISABLE_NUMBA"


def pair_stats_numpy(indptr, ids, weights, left, right):
    n = len(left)
    mins = np.zeros(n)
    maxs = np.zeros(n)
    lsum = np.zeros(n)
    for p in range(n):
        a, b = left[p], right[p]
        ia, wa = ids[indptr[a]:indptr[a + 1]], weights[indptr[a]:indptr[a + 1]]
        ib, wb = ids[indptr[b]:indptr[b + 1]], weights[indptr[b]:indptr[b + 1]]
        if len(wa):
            lsum[p] = np.add.accumulate(wa)[-1]
        union = np.union1d(ia, ib)
        if not len(union):
            continue
        da = np.zeros(len(union))
        db = np.zeros(len(union))
        da[np.searchsorted(union, ia)] = wa
        db[np.searchsorted(union, ib)] = wb
        # accumulate is strictly sequential; np.sum would reorder (pairwise).
        mins[p] = np.add.accumulate(np.minimum(da, db))[-1]
        maxs[p] = np.add.accumulate(np.maximum(da, db))[-1]
    return mins, maxs, lsum


def _pair_stats_loops(indptr, ids, weights, left, right):
    n = left.shape[0]
    mins = np.zeros(n)
    maxs = np.zeros(n)
    lsum = np.zeros(n)
    for p in range(n):
        i = indptr[left[p]]
        ie = indptr[left[p] + 1]
        j = indptr[right[p]]
        je = indptr[right[p] + 1]
        smin = 0.0
        smax = 0.0
        sl = 0.0
        while i < ie and j < je:
            ta = ids[i]
            tb = ids[j]
            if ta == tb:
                wa = weights[i]
                wb = weights[j]
                if wa < wb:
                    smin += wa
                    smax += wb
                else:
                    smin += wb
                    smax += wa
                sl += wa
                i += 1
                j += 1
            elif ta < tb:
                smax += weights[i]
                sl += weights[i]
                i += 1
            else:
                smax += weights[j]
                j += 1
        while i < ie:
            smax += weights[i]
            sl += weights[i]
            i += 1
        while j < je:
            smax += weights[j]
            j += 1
        mins[p] = smin
        maxs[p] = smax
        lsum[p] = sl
    return mins, maxs, lsum


def _load_numba():
    if os.environ.get(DISABLE_ENV, "").strip() not in ("", "0"):
        return None
    try:
        from numba import njit
    except ImportError:
        return None
    return njit(cache=True, nogil=True)(_pair_stats_loops)


pair_stats_numba = _load_numba()
BACKEND = "numba" if pair_stats_numba is not None else "numpy"


def pair_stats(indptr, ids, weights, left, right):
    left = np.ascontiguousarray(left, dtype=np.int64)
    right = np.ascontiguousarray(right, dtype=np.int64)
    if pair_stats_numba is not None:
        return pair_stats_numba(indptr, ids, weights, left, right)
    return pair_stats_numpy(indptr, ids, weights, left, right)
