"""Reference numpy kernels; work on int64 and on object (bigint) arrays."""
from __future__ import annotations

import numpy as np


def merge_sorted(lo: np.ndarray, hi: np.ndarray):
    """Merge closed intervals already sorted by ``lo`` (touching ones join)."""
    n = len(lo)
    if n == 0:
        return lo[:0].copy(), hi[:0].copy()
    reach = np.maximum.accumulate(hi)
    new = np.empty(n, dtype=bool)
    new[0] = True
    new[1:] = lo[1:] > reach[:-1]
    starts = np.flatnonzero(new)
    ends = np.append(starts[1:] - 1, n - 1)
    return lo[starts].copy(), reach[ends].copy()


def covered_mask(points: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """``points[i]`` lies in some ``[lo[k], hi[k]]`` (disjoint, sorted)."""
    if len(lo) == 0:
        return np.zeros(len(points), dtype=bool)
    k = np.searchsorted(lo, points, side="right") - 1
    ok = k >= 0
    kk = np.where(ok, k, 0)
    return ok & (points <= hi[kk])


def reach_witness(points: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Per point, the sorted position of the interval with ``lo <= t`` and the
    largest ``hi`` (first such on ties), or -1 when that ``hi`` is below ``t``.
    ``lo`` must be sorted ascending."""
    n = len(lo)
    if n == 0:
        return np.full(len(points), -1, dtype=np.int64)
    reach = np.maximum.accumulate(hi)
    new = np.empty(n, dtype=bool)
    new[0] = True
    new[1:] = hi[1:] > reach[:-1]
    arg = np.maximum.accumulate(np.where(new, np.arange(n, dtype=np.int64), 0))
    k = np.searchsorted(lo, points, side="right") - 1
    ok = k >= 0
    kk = np.where(ok, k, 0)
    ok &= points <= reach[kk]
    return np.where(ok, arg[kk], -1).astype(np.int64)
