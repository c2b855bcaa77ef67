"""Interval kernels on fixed-point integer arrays.

The compiled module is used for int64 input when it imported; object arrays
(numerators beyond 2**61) always take the numpy path.  ``BACKEND`` names the
implementation chosen at import; ``HOMCANTOR_PURE=1`` forces the fallback.
"""
from __future__ import annotations

import os

import numpy as np

from . import _kernels_py as _py

try:
    if os.environ.get("HOMCANTOR_PURE"):
        raise ImportError("pure-Python kernels requested")
    from . import _kernels as _c
    BACKEND = "cython"
except ImportError:  # pragma: no cover - depends on the build
    _c = None
    BACKEND = "numpy"


def _impl(*arrays):
    if _c is not None and all(a.dtype == np.int64 for a in arrays):
        return _c
    return _py


def _contig(a):
    return np.ascontiguousarray(a)


def merge_sorted(lo, hi):
    lo, hi = _contig(lo), _contig(hi)
    return _impl(lo, hi).merge_sorted(lo, hi)


def merge_intervals(lo, hi):
    """Union of closed intervals ``[lo[i], hi[i]]`` as sorted disjoint arrays."""
    order = np.argsort(lo, kind="stable")
    return merge_sorted(lo[order], hi[order])


def shift_union(shifts, lo, hi):
    """Merged union of ``s + [lo[j], hi[j]]`` over all shifts ``s``."""
    if len(shifts) == 0 or len(lo) == 0:
        return lo[:0].copy(), hi[:0].copy()
    all_lo = (shifts[:, None] + lo[None, :]).ravel()
    all_hi = (shifts[:, None] + hi[None, :]).ravel()
    return merge_intervals(all_lo, all_hi)


def covered_mask(points, lo, hi):
    points, lo, hi = _contig(points), _contig(lo), _contig(hi)
    return np.asarray(_impl(points, lo, hi).covered_mask(points, lo, hi), dtype=bool)


def reach_witness(points, lo, hi):
    """Index (into the given, unsorted arrays) of a covering interval per point.

    Among intervals with ``lo <= t`` the one reaching furthest right is chosen,
    so consecutive points tend to share a witness; -1 marks uncovered points.
    """
    if len(lo) == 0:
        return np.full(len(points), -1, dtype=np.int64)
    order = np.argsort(lo, kind="stable")
    slo, shi = _contig(lo[order]), _contig(hi[order])
    points = _contig(points)
    pos = np.asarray(_impl(points, slo, shi).reach_witness(points, slo, shi))
    return np.where(pos >= 0, order[np.maximum(pos, 0)], -1)
