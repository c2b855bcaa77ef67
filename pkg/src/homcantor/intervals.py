"""Finite unions of closed intervals with exact rational endpoints."""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .rational import as_fraction, fmt

Pair = tuple[Fraction, Fraction]


def _normalize(pairs: Iterable[tuple]) -> tuple[Pair, ...]:
    items = []
    for lo, hi in pairs:
        lo, hi = as_fraction(lo), as_fraction(hi)
        if hi < lo:
            continue
        items.append((lo, hi))
    items.sort()
    merged: list[list[Fraction]] = []
    for lo, hi in items:
        # closed intervals: touching endpoints merge
        if merged and lo <= merged[-1][1]:
            if hi > merged[-1][1]:
                merged[-1][1] = hi
        else:
            merged.append([lo, hi])
    return tuple((lo, hi) for lo, hi in merged)


@dataclass(frozen=True)
class IntervalUnion:
    """Sorted, pairwise-disjoint closed intervals ``[lo, hi]`` (``lo <= hi``).

    Degenerate intervals ``[x, x]`` are kept; they carry no measure but do
    carry membership, which matters for exact sweep results.
    """

    intervals: tuple[Pair, ...] = ()

    def __init__(self, pairs: Iterable[tuple] = ()):
        object.__setattr__(self, "intervals", _normalize(pairs))
        object.__setattr__(self, "_los", tuple(lo for lo, _ in self.intervals))

    @classmethod
    def _trusted(cls, pairs: Sequence[Pair]) -> "IntervalUnion":
        obj = object.__new__(cls)
        object.__setattr__(obj, "intervals", tuple(pairs))
        object.__setattr__(obj, "_los", tuple(lo for lo, _ in obj.intervals))
        return obj

    def __iter__(self) -> Iterator[Pair]:
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __bool__(self) -> bool:
        return bool(self.intervals)

    def __repr__(self) -> str:
        body = ", ".join(f"[{fmt(lo)}, {fmt(hi)}]" for lo, hi in self.intervals)
        return f"IntervalUnion({body})"

    @property
    def measure(self) -> Fraction:
        return sum((hi - lo for lo, hi in self.intervals), Fraction(0))

    @property
    def lo(self) -> Fraction:
        return self.intervals[0][0]

    @property
    def hi(self) -> Fraction:
        return self.intervals[-1][1]

    def _index(self, x: Fraction) -> int:
        """Index of the last component with ``lo <= x`` (or -1)."""
        return bisect_right(self._los, x) - 1

    def __contains__(self, x) -> bool:
        x = as_fraction(x)
        i = self._index(x)
        return i >= 0 and x <= self.intervals[i][1]

    def component_of(self, x) -> Pair | None:
        x = as_fraction(x)
        i = self._index(x)
        if i >= 0 and x <= self.intervals[i][1]:
            return self.intervals[i]
        return None

    def contains_interval(self, lo, hi) -> bool:
        comp = self.component_of(lo)
        return comp is not None and as_fraction(hi) <= comp[1]

    def interior_contains(self, lo, hi) -> bool:
        """True iff ``[lo, hi]`` lies in the open interior of one component."""
        lo, hi = as_fraction(lo), as_fraction(hi)
        i = self._index(lo)
        if i < 0:
            return False
        a, b = self.intervals[i]
        return a < lo and hi < b

    def distance_to(self, x) -> Fraction:
        x = as_fraction(x)
        if not self.intervals:
            raise ValueError("distance to an empty union")
        i = self._index(x)
        best = None
        for j in (i, i + 1):
            if 0 <= j < len(self.intervals):
                a, b = self.intervals[j]
                d = Fraction(0) if a <= x <= b else min(abs(x - a), abs(x - b))
                best = d if best is None else min(best, d)
        return best

    def union(self, other: "IntervalUnion") -> "IntervalUnion":
        return IntervalUnion(self.intervals + other.intervals)

    def intersect(self, other: "IntervalUnion") -> "IntervalUnion":
        out = []
        i = j = 0
        a, b = self.intervals, other.intervals
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo <= hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return IntervalUnion(out)

    def clip(self, lo, hi) -> "IntervalUnion":
        return self.intersect(IntervalUnion([(lo, hi)]))

    def neighborhood(self, radius) -> "IntervalUnion":
        """Closed ``radius``-neighbourhood."""
        r = as_fraction(radius)
        if r < 0:
            raise ValueError("negative radius")
        return IntervalUnion((lo - r, hi + r) for lo, hi in self.intervals)

    def shifted(self, by) -> "IntervalUnion":
        by = as_fraction(by)
        return IntervalUnion._trusted([(lo + by, hi + by) for lo, hi in self.intervals])

    def scaled(self, factor) -> "IntervalUnion":
        f = as_fraction(factor)
        if f <= 0:
            raise ValueError("scale factor must be positive")
        return IntervalUnion._trusted([(lo * f, hi * f) for lo, hi in self.intervals])

    def issubset(self, other: "IntervalUnion") -> bool:
        return all(other.contains_interval(lo, hi) for lo, hi in self.intervals)

    def largest_component(self) -> Pair | None:
        if not self.intervals:
            return None
        # ties resolved towards the leftmost component
        return max(self.intervals, key=lambda c: (c[1] - c[0], -c[0]))

    def gaps(self) -> list[Pair]:
        return [(self.intervals[i][1], self.intervals[i + 1][0])
                for i in range(len(self.intervals) - 1)]

    def to_json(self) -> list[list[str]]:
        return [[fmt(lo), fmt(hi)] for lo, hi in self.intervals]

    @classmethod
    def from_json(cls, data) -> "IntervalUnion":
        return cls((as_fraction(lo), as_fraction(hi)) for lo, hi in data)
