"""Difference measure of two homogeneous Cantor sets and good/bad pairs.

With uniform weights every depth-``n`` cylinder pair carries mass
``|A|^-n |A'|^-n`` and projects under ``(x, x') -> x - x'`` onto an interval
of length ``(1 + s0) * ratio**n``.  Everything here is exact.
"""
from __future__ import annotations

import csv
import io
import math
from bisect import bisect_left, bisect_right
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .ifs import HomogeneousIFS, IFSError
from .intervals import IntervalUnion
from .rational import RationalLike, as_fraction, decimal, fmt


class TooManyPairs(RuntimeError):
    pass


def _check_pair(K: HomogeneousIFS, Kp: HomogeneousIFS) -> Fraction:
    if K.ratio != Kp.ratio:
        raise IFSError("K and K' must share their ratio")
    if K.hull != 1:
        raise IFSError("K must be normalized to hull [0, 1]")
    return Kp.hull


# -- difference multiset -------------------------------------------------------

def difference_offsets(K: HomogeneousIFS, Kp: HomogeneousIFS, n: int,
                       cap: int = 10**7) -> Counter:
    """Multiset ``{e_w - e'_w'}`` over depth-``n`` word pairs, built levelwise."""
    _check_pair(K, Kp)
    if (K.size * Kp.size) ** n > cap:
        raise TooManyPairs(f"{(K.size * Kp.size) ** n} cylinder pairs exceed cap {cap}")
    base = Counter(e - ep for e in K.offsets for ep in Kp.offsets)
    out: Counter = Counter({Fraction(0): 1})
    scale = Fraction(1)
    for _ in range(n):
        nxt: Counter = Counter()
        for d, m in out.items():
            for c, k in base.items():
                nxt[d + scale * c] += m * k
        out = nxt
        scale *= K.ratio
    return out


# -- histograms ----------------------------------------------------------------

@dataclass(frozen=True)
class DensityHistogram:
    """Masses on bins ``[origin + i*width, origin + (i+1)*width]``, the last
    one cut at ``upper`` when the range is not a whole number of bins."""

    width: Fraction
    origin: Fraction
    bins: Mapping[int, Fraction] = field(default_factory=dict)
    upper: Fraction | None = None

    @property
    def total(self) -> Fraction:
        return sum(self.bins.values(), Fraction(0))

    def center(self, i: int) -> Fraction:
        return self.origin + (i + Fraction(1, 2)) * self.width

    def bin_width(self, i: int) -> Fraction:
        lo = self.origin + i * self.width
        hi = lo + self.width
        if self.upper is not None:
            hi = min(hi, self.upper)
        return hi - lo

    def support(self) -> tuple[Fraction, Fraction]:
        idx = [i for i, m in self.bins.items() if m]
        hi = self.origin + (max(idx) + 1) * self.width
        if self.upper is not None:
            hi = min(hi, self.upper)
        return self.origin + min(idx) * self.width, hi

    def l2(self) -> Fraction:
        """``sum (m/w)^2 * w`` for the piecewise-constant density."""
        return sum((m * m / self.bin_width(i) for i, m in self.bins.items() if m), Fraction(0))

    def to_csv(self, places: int = 6) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_center", "mass", "bin_center_exact", "mass_exact"])
        for i in sorted(self.bins):
            c, m = self.center(i), self.bins[i]
            w.writerow([decimal(c, places), decimal(m, places), fmt(c), fmt(m)])
        return buf.getvalue()


def pushforward_histogram(K: HomogeneousIFS, Kp: HomogeneousIFS, n: int,
                          cap: int = 10**7) -> DensityHistogram:
    """Depth-``n`` histogram of the difference measure, bins anchored at ``-s0``."""
    s0 = _check_pair(K, Kp)
    width = (1 + s0) * K.ratio ** n
    origin = -s0
    mult = difference_offsets(K, Kp, n, cap)
    each = Fraction(1, (K.size * Kp.size) ** n)
    bins: dict[int, Fraction] = {}
    for d, m in mult.items():
        lo = d - s0 * K.ratio ** n          # difference interval [lo, lo + width]
        pos = (lo - origin) / width
        i = math.floor(pos)
        frac = pos - i
        mass = each * m
        bins[i] = bins.get(i, Fraction(0)) + mass * (1 - frac)
        if frac:
            bins[i + 1] = bins.get(i + 1, Fraction(0)) + mass * frac
    return DensityHistogram(width, origin, {i: bins[i] for i in sorted(bins)}, Fraction(1))


@dataclass(frozen=True)
class L2Report:
    estimates: tuple[Fraction, ...]
    ratios: tuple[Fraction, ...]
    verdict: str


def l2_estimate(histograms: Sequence[DensityHistogram],
                tolerance: RationalLike = Fraction(1, 10)) -> L2Report:
    """Riemann estimates of the squared L2 norm and a stability verdict."""
    if len(histograms) < 3:
        raise ValueError("need histograms at three or more depths")
    tol = as_fraction(tolerance)
    est = tuple(h.l2() for h in histograms)
    ratios = tuple(b / a for a, b in zip(est, est[1:]))
    verdict = "bounded" if ratios[-1] <= 1 + tol else "growing"
    return L2Report(est, ratios, verdict)


# -- exact piecewise density ---------------------------------------------------

def density_integral(K: HomogeneousIFS, Kp: HomogeneousIFS, n: int, lo: Fraction,
                     hi: Fraction) -> Fraction:
    """``int_lo^hi chi_n`` where ``chi_n`` spreads each depth-``n`` pair's mass
    uniformly over its difference interval."""
    s0 = _check_pair(K, Kp)
    r = K.ratio ** n
    width = (1 + s0) * r
    each = Fraction(1, (K.size * Kp.size) ** n)
    total = Fraction(0)
    for d, m in difference_offsets(K, Kp, n).items():
        a, b = d - s0 * r, d + r
        overlap = min(b, hi) - max(a, lo)
        if overlap > 0:
            total += m * each * overlap / width
    return total


# -- good and bad pairs --------------------------------------------------------

@dataclass(frozen=True)
class PairInfo:
    a: str
    ap: str
    center: Fraction
    neighbors: int
    good: bool


@dataclass(frozen=True)
class GoodPairTable:
    pairs: tuple[PairInfo, ...]
    threshold: Fraction
    radius: Fraction
    length: Fraction

    @property
    def B(self) -> int:
        return len(self.pairs)

    @property
    def G(self) -> int:
        return sum(p.good for p in self.pairs)

    def good_pairs(self) -> list[tuple[str, str]]:
        return [(p.a, p.ap) for p in self.pairs if p.good]

    def good_set(self) -> set[tuple[str, str]]:
        return set(self.good_pairs())

    def degree(self, a: str) -> int:
        """``|G_a|``: good partners of ``a``."""
        return sum(p.good for p in self.pairs if p.a == a)

    def count(self, first: set[str], second: set[str] | None = None) -> int:
        return sum(p.good and p.a in first and (second is None or p.ap in second)
                   for p in self.pairs)

    def good_union(self) -> IntervalUnion:
        half = self.length / 2
        return IntervalUnion((p.center - half, p.center + half) for p in self.pairs if p.good)


def good_threshold(K: HomogeneousIFS, Kp: HomogeneousIFS, c2: RationalLike) -> Fraction:
    """Neighbour budget ``c2^-1 * rho^{-(d+d'-1)/2}``, i.e. ``|A||A'| r / c2``."""
    return K.size * Kp.size * K.ratio / as_fraction(c2)


def l2_c2(c5: RationalLike, s0: RationalLike) -> Fraction:
    """Largest ``c2`` for which the Cauchy-Schwarz count of bad pairs,
    ``< 6 c2 c5 (1 + s0) |B|``, stays below ``|B| / 16``.

    ``c5`` bounds the squared L2 norm of the difference density; uniform
    weights on a homogeneous set make the cylinder-mass constant equal 1.
    """
    return 1 / (96 * as_fraction(c5) * (1 + as_fraction(s0)))


def classify_pairs(K: HomogeneousIFS, Kp: HomogeneousIFS, c2: RationalLike) -> GoodPairTable:
    s0 = _check_pair(K, Kp)
    c2 = as_fraction(c2)
    if c2 <= 0:
        raise ValueError("c2 must be positive")
    r = K.ratio
    radius = (1 + s0) * r
    thr = good_threshold(K, Kp, c2)
    raw = [(a, ap, K.offset(a) - Kp.offset(ap) + r * (1 - s0) / 2)
           for a in K.labels for ap in Kp.labels]
    centers = sorted(c for _, _, c in raw)
    pairs = []
    for a, ap, c in raw:
        # strictly closer than radius, self excluded
        lo = bisect_right(centers, c - radius)
        hi = bisect_left(centers, c + radius)
        n = hi - lo - 1
        pairs.append(PairInfo(a, ap, c, n, n <= thr))
    return GoodPairTable(tuple(pairs), thr, radius, radius)


@dataclass(frozen=True)
class MassReport:
    pair_mass: Fraction
    scale_mass: Fraction
    c4: Fraction
    pairs: int


def measure_bounds_check(K: HomogeneousIFS, Kp: HomogeneousIFS) -> MassReport:
    """Per-pair mass against ``rho^{(d+d')/2}``.

    With ``rho^{1/2} = r`` and ``r^d = 1/|A|`` the scale term is exactly
    ``1/(|A||A'|)``; the float check guards the identity itself.
    """
    _check_pair(K, Kp)
    mass = Fraction(1, K.size * Kp.size)
    if K.size > 1 or Kp.size > 1:
        approx = float(K.ratio) ** (K.dimension() + Kp.dimension())
        if not math.isclose(approx, float(mass), rel_tol=1e-9):
            raise AssertionError("dimension identity failed")
    scale = Fraction(1, K.size * Kp.size)
    return MassReport(mass, scale, scale / mass, K.size * Kp.size)
