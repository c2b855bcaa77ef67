"""Classical baselines: dimension and thickness tests, brute-force sumsets.

``brute_sumset`` is the finite-depth oracle: the union of all depth-``n``
cylinder sums (or differences) is a decreasing cover of ``K + K'``
(``K - K'``), so anything claimed inside the limit set must survive it.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from mpmath import iv

from . import kernels
from .ifs import HomogeneousIFS, IFSError, middle_alpha
from .intervals import IntervalUnion
from .rational import RationalLike, as_fraction, decimal, fmt

CANTOR = "CantorRegime"
GAP_LEMMA = "GapLemmaRegime"
MYSTERIOUS = "Mysterious"


class TooManyIntervals(RuntimeError):
    pass


# -- thickness ---------------------------------------------------------------

def thickness(ifs: HomogeneousIFS) -> Fraction:
    """Newhouse thickness of the depth-1 presentation: for each gap, the shorter
    neighbouring cylinder over the gap, minimized over gaps."""
    if ifs.size < 2:
        raise IFSError("thickness undefined without gaps")
    cyl = sorted(ifs.cylinder(a) for a in ifs.labels)
    best = None
    for (lo1, hi1), (lo2, hi2) in zip(cyl, cyl[1:]):
        gap = lo2 - hi1
        if gap <= 0:
            raise IFSError("cylinders overlap")
        tau = min(hi1 - lo1, hi2 - lo2) / gap
        best = tau if best is None else min(best, tau)
    return best


# -- regime classification -------------------------------------------------------

def _power_of_two(x: Fraction) -> int | None:
    """``k`` with ``x == 2**k`` (only integer exponents give rationals)."""
    if x.numerator > 0 and x.denominator == 1 and x.numerator & (x.numerator - 1) == 0:
        return x.numerator.bit_length() - 1
    if x.numerator == 1 and x.denominator & (x.denominator - 1) == 0:
        return -(x.denominator.bit_length() - 1)
    return None


def dimension_sum_below_one(a: RationalLike, b: RationalLike, max_prec: int = 1 << 14) -> bool:
    """``log2/log(1/a) + log2/log(1/b) < 1`` decided rigorously.

    Equivalent form: ``log(1/(2a)) * log(1/(2b)) > log(2)**2``.  Equal
    parameters reduce to ``a < 1/4``; powers of two reduce to integers;
    otherwise interval arithmetic is refined until the sign is certain.
    """
    a, b = as_fraction(a), as_fraction(b)
    if a == b:
        return a < Fraction(1, 4)
    x, y = 1 / (2 * a), 1 / (2 * b)
    kx, ky = _power_of_two(x), _power_of_two(y)
    if kx is not None and ky is not None:
        return kx * ky > 1
    prec = 64
    while prec <= max_prec:
        iv.prec = prec
        try:
            lx = iv.log(iv.mpf(x.numerator) / x.denominator)
            ly = iv.log(iv.mpf(y.numerator) / y.denominator)
            diff = lx * ly - iv.log(iv.mpf(2)) ** 2
        finally:
            iv.prec = 53
        if diff.a > 0:
            return True
        if diff.b < 0:
            return False
        prec *= 2
    raise ArithmeticError(f"dimension test undecided for a={fmt(a)}, b={fmt(b)}")


@dataclass(frozen=True)
class RegimeVerdict:
    a: Fraction
    b: Fraction
    dim_a: float
    dim_b: float
    thickness_product: Fraction
    verdict: str

    @property
    def dim_sum(self) -> float:
        return self.dim_a + self.dim_b

    def to_json(self) -> dict:
        return {"a": fmt(self.a), "b": fmt(self.b),
                "dims": {"a": f"log 2 / log({fmt(1 / self.a)})",
                         "b": f"log 2 / log({fmt(1 / self.b)})",
                         "a_decimal": round(self.dim_a, 6), "b_decimal": round(self.dim_b, 6)},
                "d_sum": round(self.dim_sum, 6),
                "thickness_product": fmt(self.thickness_product),
                "thickness_product_decimal": decimal(self.thickness_product),
                "verdict": self.verdict}


def classify_region(a: RationalLike, b: RationalLike) -> RegimeVerdict:
    a, b = as_fraction(a), as_fraction(b)
    for x in (a, b):
        if not (0 < x < Fraction(1, 2)):
            raise ValueError(f"parameter {fmt(x)} not in (0, 1/2)")
    tau = (a / (1 - 2 * a)) * (b / (1 - 2 * b))
    if tau >= 1:
        verdict = GAP_LEMMA
    elif dimension_sum_below_one(a, b):
        verdict = CANTOR
    else:
        verdict = MYSTERIOUS
    da = math.log(2) / math.log(1 / a)
    db = math.log(2) / math.log(1 / b)
    return RegimeVerdict(a, b, da, db, tau, verdict)


# -- brute-force sumsets -----------------------------------------------------------

def _signed(Kp: HomogeneousIFS, mode: str):
    if mode == "sum":
        return 1
    if mode == "difference":
        return -1
    raise ValueError(f"mode must be 'sum' or 'difference', not {mode!r}")


def _base_interval(K: HomogeneousIFS, Kp: HomogeneousIFS, mode: str):
    if mode == "sum":
        return Fraction(0), K.hull + Kp.hull
    return -Kp.hull, K.hull


def _to_union(lo, hi, q) -> IntervalUnion:
    return IntervalUnion._trusted([(Fraction(int(x), q), Fraction(int(y), q))
                                   for x, y in zip(lo, hi)])


def brute_sumset(K: HomogeneousIFS, Kp: HomogeneousIFS, depth: int, mode: str = "sum",
                 cap: int = 5 * 10**6, method: str = "auto",
                 window: tuple | None = None) -> IntervalUnion:
    """Union of depth-``n`` cylinder sums/differences ``I(w) +- I'(w')``.

    Equal ratios use the levelwise recursion ``U_n = U_1-offsets + r U_{n-1}``
    (merged at every level); ``method="enumerate"`` lists the word pairs.
    With ``window=(lo, hi)`` only the pairs meeting the window are expanded,
    so the result agrees with the full union on ``[lo, hi]``.
    """
    sign = _signed(Kp, mode)
    if depth < 0:
        raise ValueError("depth must be >= 0")
    lo0, hi0 = _base_interval(K, Kp, mode)
    if window is not None:
        if K.ratio != Kp.ratio:
            raise IFSError("windowed sumsets need equal ratios")
        return _windowed(K, Kp, depth, sign, lo0, hi0, window, cap)
    if method == "auto":
        method = "levelwise" if K.ratio == Kp.ratio else "enumerate"
    if method == "levelwise":
        if K.ratio != Kp.ratio:
            raise IFSError("levelwise sumsets need equal ratios")
        return _levelwise(K, Kp, depth, sign, lo0, hi0, cap)
    if (K.size * Kp.size) ** depth > cap:
        raise TooManyIntervals(f"{(K.size * Kp.size) ** depth} pairs exceed cap {cap}")
    items = []
    sK, sKp = K.ratio ** depth * K.hull, Kp.ratio ** depth * Kp.hull
    offs = [K.word_offset(w) for w in itertools.product(K.labels, repeat=depth)]
    offps = [Kp.word_offset(w) for w in itertools.product(Kp.labels, repeat=depth)]
    for e in offs:
        for ep in offps:
            if sign > 0:
                items.append((e + ep, e + ep + sK + sKp))
            else:
                items.append((e - ep - sKp, e + sK - ep))
    return IntervalUnion(items)


def _levelwise(K, Kp, depth, sign, lo0, hi0, cap) -> IntervalUnion:
    shifts = sorted({e + sign * ep for e in K.offsets for ep in Kp.offsets})
    r = K.ratio
    d = math.lcm(*(x.denominator for x in shifts + [lo0, hi0]))
    # level k lives on the grid 1/(d * den(r)^k)
    q = d
    lo_a = np.array([lo0.numerator * (q // lo0.denominator)], dtype=object)
    hi_a = np.array([hi0.numerator * (q // hi0.denominator)], dtype=object)
    span = abs(hi0) + abs(lo0) + 2
    for _ in range(depth):
        q_next = q * r.denominator
        if len(shifts) * len(lo_a) > cap:
            raise TooManyIntervals(f"{len(shifts) * len(lo_a)} intervals exceed cap {cap}")
        # promote before multiplying so int64 never overflows
        dtype = np.int64 if span * q_next * max(1, r.numerator) < (1 << 61) else object
        c = np.array([s.numerator * (q_next // s.denominator) for s in shifts], dtype=dtype)
        lo_a = lo_a.astype(dtype) * r.numerator
        hi_a = hi_a.astype(dtype) * r.numerator
        q = q_next
        lo_a, hi_a = kernels.shift_union(c, lo_a, hi_a)
    return _to_union(lo_a, hi_a, q)


def _windowed(K, Kp, depth, sign, lo0, hi0, window, cap) -> IntervalUnion:
    wlo, whi = (as_fraction(x) for x in window)
    r = K.ratio
    shifts = sorted({e + sign * ep for e in K.offsets for ep in Kp.offsets})
    q = math.lcm(*(x.denominator for x in shifts + [lo0, hi0, wlo, whi])) * r.denominator ** depth
    bound = (abs(wlo) + abs(whi) + abs(lo0) + abs(hi0) + 2) * q
    dtype = np.int64 if bound * 4 < (1 << 61) else object

    def enc(x: Fraction) -> int:
        return x.numerator * (q // x.denominator)

    d = np.zeros(1, dtype=dtype)
    W_lo, W_hi = enc(wlo), enc(whi)
    for k in range(depth + 1):
        scale = r ** k
        keep = (d + enc(scale * lo0) <= W_hi) & (d + enc(scale * hi0) >= W_lo)
        d = d[keep]
        if k == depth or not len(d):
            break
        c = np.array([enc(scale * s) for s in shifts], dtype=dtype)
        if len(d) * len(c) > cap:
            raise TooManyIntervals(f"{len(d) * len(c)} pairs exceed cap {cap}")
        d = np.unique((d[:, None] + c[None, :]).ravel())
    scale = r ** depth
    lo_a, hi_a = kernels.merge_intervals(d + enc(scale * lo0), d + enc(scale * hi0))
    return _to_union(lo_a, hi_a, q)


def gap_count(U: IntervalUnion) -> int:
    return max(0, len(U) - 1)


# -- region grid ----------------------------------------------------------------------

GRID_COLUMNS = ["a", "b", "d_sum", "thickness_product", "verdict", "gaps_at_depth",
                "a_exact", "b_exact", "thickness_product_exact", "depth"]


def region_grid(resolution: int, depth: int = 4) -> list[dict]:
    """Cells ``a_i = i / (2 * resolution)``, ``i = 1 .. resolution - 1``, both axes."""
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    params = [Fraction(i, 2 * resolution) for i in range(1, resolution)]
    sets = {p: middle_alpha(p) for p in params}
    rows = []
    for a in params:
        for b in params:
            v = classify_region(a, b)
            U = brute_sumset(sets[a], sets[b], depth, "sum")
            rows.append({
                "a": decimal(a), "b": decimal(b), "d_sum": f"{v.dim_sum:.6f}",
                "thickness_product": decimal(v.thickness_product),
                "verdict": v.verdict, "gaps_at_depth": gap_count(U),
                "a_exact": fmt(a), "b_exact": fmt(b),
                "thickness_product_exact": fmt(v.thickness_product), "depth": depth,
            })
    return rows


def grid_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=GRID_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()
