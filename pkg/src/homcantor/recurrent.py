"""Candidate recurrent sets built from independent depth-2 returns.

Inputs are the ``r``-contraction presentations of ``K`` and ``K'`` with
``rho = r**2``.  A word pair ``(b, b')`` of depth 2 returns ``t`` to the
linked range, ``|T_b T'_b'(t)| <= 1 + s0``, exactly on the interval
``[d - (1+s0) rho, d + (1+s0) rho]`` with ``d = e_b - e'_b'``.  ``L0`` is where
at least ``N`` distinct first letters ``a1`` admit such a return.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Sequence

from .density import GoodPairTable
from .ifs import HomogeneousIFS, IFSError
from .intervals import IntervalUnion
from .rational import RationalLike, as_fraction, fmt

CROSS = "cross"
SELF = "self"


class PartitionInfeasible(ValueError):
    pass


class ConstructionError(ValueError):
    pass


# -- partitions ----------------------------------------------------------------

@dataclass(frozen=True)
class Partition:
    A1: tuple[str, ...]
    A2: tuple[str, ...]
    counts: dict
    method: str


def _g_counts(table: GoodPairTable, A1, A2) -> dict:
    return {"G": table.G, "G1": table.count(set(A1)), "G2": table.count(set(A2))}


def _partition_ok(c: dict) -> bool:
    return 3 * c["G1"] >= c["G"] and 3 * c["G2"] >= c["G"]


def select_partitions(table: GoodPairTable, K: HomogeneousIFS) -> Partition:
    """Disjoint ``A1, A2`` with endmost letters kept out of ``A1`` and
    ``|G^(l)| >= |G|/3`` for both classes.

    Greedy: ``A1`` starts as every non-endmost letter (``N`` can never exceed
    ``|A1|``) and sheds its lowest-degree letters to ``A2`` until ``A2`` holds a
    third of the good pairs.  Small alphabets fall back to exhaustive search.
    """
    if K.size < 4:
        raise PartitionInfeasible(f"|A| = {K.size} < 4: no admissible split")
    ends = set(K.endmost())
    order = [a for a in K.labels]
    nonend = [a for a in order if a not in ends]
    by_degree = sorted(nonend, key=lambda a: (-table.degree(a), order.index(a)))
    A1 = list(by_degree)
    while True:
        A2 = [a for a in order if a not in A1]
        c = _g_counts(table, A1, A2)
        if 3 * c["G2"] >= c["G"] or len(A1) == 1:
            break
        A1.pop()
    if _partition_ok(c):
        return Partition(tuple(a for a in order if a in A1), tuple(A2), c, "greedy")
    best = None
    if K.size <= 16:
        for k in range(len(nonend), 0, -1):
            for sub in itertools.combinations(nonend, k):
                A2 = [a for a in order if a not in sub]
                c = _g_counts(table, sub, A2)
                if _partition_ok(c):
                    return Partition(tuple(sub), tuple(A2), c, "exhaustive")
                if best is None or min(c["G1"], c["G2"]) > min(best["G1"], best["G2"]):
                    best = c
    best = best or c
    raise PartitionInfeasible(
        f"no split reaches |G^(l)| >= |G|/3; best G1={best['G1']}, G2={best['G2']}, G={best['G']}")


def select_partitions_selfsum(table: GoodPairTable, K: HomogeneousIFS) -> Partition:
    """Self-sum split: ``Abar = {a : |G_a| >= 3|A|/4}`` halved, ``A~1`` non-endmost,
    and all four ``|G^(lm)| >= 3|B|/64`` (which implies the ``3|G|/64`` form)."""
    if 16 * table.G < 15 * table.B:
        raise PartitionInfeasible(f"|G| = {table.G} < 15/16 |B| = {fmt(Fraction(15 * table.B, 16))}")
    ends = set(K.endmost())
    abar = [a for a in K.labels if 4 * table.degree(a) >= 3 * K.size]
    half = len(abar) // 2
    cand1 = [a for a in abar if a not in ends]
    if half == 0 or len(cand1) < half:
        raise PartitionInfeasible(f"|Abar| = {len(abar)} too small for a split")

    def counts(A1, A2):
        s1, s2 = set(A1), set(A2)
        c = {"G": table.G, "B": table.B}
        for name, x, y in (("G11", s1, s1), ("G12", s1, s2), ("G21", s2, s1), ("G22", s2, s2)):
            c[name] = table.count(x, y)
        return c

    def ok(c):
        return all(64 * c[k] >= 3 * c["B"] for k in ("G11", "G12", "G21", "G22"))

    tries = [tuple(cand1[:half])]
    if len(cand1) <= 16:
        tries += list(itertools.combinations(cand1, half))
    best = None
    for A1 in tries:
        A2 = tuple(a for a in abar if a not in A1)
        c = counts(A1, A2)
        if ok(c):
            c["abar"] = len(abar)
            return Partition(A1, A2, c, "halves")
        best = best or c
    raise PartitionInfeasible(f"no halving of Abar meets the 3/64 bounds: {best}")


# -- sweep over closed intervals -------------------------------------------------

def elementary_pieces(items: Sequence[tuple[Fraction, Fraction, object]]):
    """Split the line at every endpoint and yield ``(lo, hi, active)``.

    Points ``[x, x]`` and open segments between consecutive endpoints come
    out in order; ``active`` lists the payloads of the closed intervals that
    contain the piece (for a segment, its closure).
    """
    xs = sorted({x for lo, hi, _ in items for x in (lo, hi)})
    by_lo = sorted(range(len(items)), key=lambda i: items[i][0])
    active: dict[int, None] = {}
    j = 0
    for k, x in enumerate(xs):
        while j < len(by_lo) and items[by_lo[j]][0] == x:
            active[by_lo[j]] = None
            j += 1
        here = [i for i in active if items[i][1] >= x]
        yield x, x, [items[i][2] for i in sorted(here)]
        for i in list(active):
            if items[i][1] <= x:
                del active[i]
        if k + 1 < len(xs):
            yield x, xs[k + 1], [items[i][2] for i in sorted(active)]


def level_set(items: Sequence[tuple[Fraction, Fraction, Hashable]], N: int) -> IntervalUnion:
    """``{t : #distinct keys of intervals containing t >= N}`` as a closed union."""
    out = []
    for lo, hi, keys in elementary_pieces(items):
        if len(set(keys)) >= N:
            out.append((lo, hi))
    return IntervalUnion(out)


# -- the candidate -------------------------------------------------------------

@dataclass(frozen=True)
class Witness:
    a1: str
    b: tuple[str, str]
    bp: tuple[str, str]


@dataclass(frozen=True)
class Piece:
    lo: Fraction
    hi: Fraction
    witnesses: tuple[Witness, ...]


@dataclass(frozen=True)
class RecurrentCandidate:
    K: HomogeneousIFS
    Kp: HomogeneousIFS
    A1: tuple[str, ...]
    A2: tuple[str, ...]
    N: int
    mode: str
    L0: IntervalUnion
    L1: IntervalUnion
    L: IntervalUnion
    pieces: tuple[Piece, ...]

    @property
    def r(self) -> Fraction:
        return self.K.ratio

    @property
    def rho(self) -> Fraction:
        return self.K.ratio ** 2

    @property
    def s0(self) -> Fraction:
        return self.Kp.hull

    def witnesses_at(self, t: Fraction) -> tuple[Witness, ...]:
        for p in self.pieces:
            if p.lo <= t <= p.hi:
                return p.witnesses
        return ()

    def to_json(self) -> dict:
        return {
            "mode": self.mode, "N": self.N, "A1": list(self.A1), "A2": list(self.A2),
            "L0": self.L0.to_json(), "L1": self.L1.to_json(), "L": self.L.to_json(),
            "pieces": [{"lo": fmt(p.lo), "hi": fmt(p.hi),
                        "witnesses": [[w.a1, list(w.b), list(w.bp)] for w in p.witnesses]}
                       for p in self.pieces],
        }


def admissible_words(K: HomogeneousIFS, Kp: HomogeneousIFS, A1, A2, mode: str):
    """Depth-2 word pairs allowed as independent returns, with ``e_b - e'_b'``."""
    if mode == CROSS:
        firsts, seconds = A1, A2
        primes = list(itertools.product(Kp.labels, repeat=2))
    elif mode == SELF:
        firsts, seconds = A1, A2
        primes = list(itertools.product(A2, repeat=2))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    out = []
    for a1 in firsts:
        for a2 in seconds:
            eb = K.word_offset((a1, a2))
            for bp in primes:
                out.append((a1, (a1, a2), bp, eb - Kp.word_offset(bp)))
    return out


def return_interval(d: Fraction, rho: Fraction, s0: Fraction) -> tuple[Fraction, Fraction]:
    return d - (1 + s0) * rho, d + (1 + s0) * rho


def build_L0(K: HomogeneousIFS, Kp: HomogeneousIFS, A1: Sequence[str], A2: Sequence[str],
             N: int, mode: str = CROSS) -> RecurrentCandidate:
    if K.ratio != Kp.ratio or K.hull != 1:
        raise IFSError("build_L0 needs a common ratio and K normalized to [0, 1]")
    if set(A1) & set(A2):
        raise ConstructionError("A1 and A2 must be disjoint")
    if mode == SELF and K != Kp:
        raise ConstructionError("self mode needs K' = K")
    if N < 1:
        raise ConstructionError(f"N = {N} < 1: c2 too small for this ratio")
    rho = K.ratio ** 2
    s0 = Kp.hull
    bound = 1 + s0
    items = []
    for a1, b, bp, d in admissible_words(K, Kp, A1, A2, mode):
        lo, hi = return_interval(d, rho, s0)
        items.append((lo, hi, Witness(a1, b, bp)))
    pieces: list[Piece] = []
    for lo, hi, ws in elementary_pieces(items):
        first: dict[str, Witness] = {}
        for w in ws:
            first.setdefault(w.a1, w)
        if len(first) < N:
            continue
        if lo == hi and pieces and pieces[-1].hi == lo:
            continue  # already inside the previous closed segment
        if pieces and pieces[-1].lo == pieces[-1].hi == lo:
            pieces.pop()  # a point subsumed by this segment
        if -bound < lo and hi < bound:
            pieces.append(Piece(lo, hi, tuple(first[a] for a in A1 if a in first)))
        else:
            raise ConstructionError("return intervals left the linked range")
    L0 = IntervalUnion((p.lo, p.hi) for p in pieces)
    return RecurrentCandidate(K, Kp, tuple(A1), tuple(A2), N, mode, L0,
                              L0.neighborhood(rho), L0.neighborhood(rho / 2), tuple(pieces))


@dataclass(frozen=True)
class EReport:
    E: IntervalUnion
    phi0_integral: Fraction
    sweep_integral: Fraction
    J0_measures: dict
    phi0_max: int = 0


def build_E(K: HomogeneousIFS, Kp: HomogeneousIFS, A1, A2, table: GoodPairTable,
            N: int, distinct_first: bool = False) -> EReport:
    """``E = {phi0 >= N}`` with ``phi0 = sum over G^(1) of 1_{J0(a1, a1')}``.

    ``distinct_first=True`` counts distinct ``a1`` instead of pairs, the
    count ``L0`` is built from; that variant is always inside ``L0``.
    """
    rho = K.ratio ** 2
    s0 = Kp.hull
    g1 = [(a, ap) for a, ap in table.good_pairs() if a in set(A1)]
    g2 = [(a, ap) for a, ap in table.good_pairs() if a in set(A2)]
    items = []
    measures = {}
    for a1, ap1 in g1:
        parts = []
        for a2, ap2 in g2:
            d = K.word_offset((a1, a2)) - Kp.word_offset((ap1, ap2))
            parts.append((d - s0 * rho, d + rho))
        J0 = IntervalUnion(parts)
        measures[(a1, ap1)] = J0.measure
        key = a1 if distinct_first else (a1, ap1)
        items.extend((lo, hi, key) for lo, hi in J0)
    E = level_set(items, N) if items else IntervalUnion()
    integral = Fraction(0)
    top = 0
    for lo, hi, keys in elementary_pieces(items):
        integral += (hi - lo) * len(keys)
        top = max(top, len(set(keys)))
    return EReport(E, sum(measures.values(), Fraction(0)), integral, measures, top)


def measure(U: IntervalUnion) -> Fraction:
    return U.measure
