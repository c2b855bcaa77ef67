"""Homogeneous Cantor sets given by exact affine IFS data.

A set is stored as its depth-1 cylinder layout: every letter ``a`` owns the
cylinder ``I(a) = [e_a, e_a + ratio * hull]`` inside ``[0, hull]``.  All
arithmetic is on :class:`fractions.Fraction`, so refinement, perturbation and
comparison never round.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .rational import RationalLike, as_fraction, fmt

Word = tuple[str, ...]


class IFSError(ValueError):
    """Raised for malformed or invalid IFS data."""


class PerturbationError(IFSError):
    """A perturbation would leave the class of homogeneous Cantor sets."""


class Incommensurable(IFSError):
    """No common power of the two ratios was found within the exponent cap."""


@dataclass(frozen=True)
class Violation:
    invariant: str
    labels: tuple[str, ...]
    detail: str


@dataclass(frozen=True)
class HomogeneousIFS:
    labels: tuple[str, ...]
    ratio: Fraction
    offsets: tuple[Fraction, ...]
    hull: Fraction = Fraction(1)
    # middle-alpha parameter, kept only so config files round-trip in that form
    alpha: Fraction | None = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.labels) != len(self.offsets):
            raise IFSError("labels and offsets differ in length")
        if len(set(self.labels)) != len(self.labels):
            raise IFSError("duplicate labels")
        object.__setattr__(self, "ratio", as_fraction(self.ratio))
        object.__setattr__(self, "hull", as_fraction(self.hull))
        object.__setattr__(self, "offsets", tuple(as_fraction(e) for e in self.offsets))

    # -- basic geometry -------------------------------------------------
    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def cylinder_length(self) -> Fraction:
        return self.ratio * self.hull

    def offset(self, label: str) -> Fraction:
        return self.offsets[self._index[label]]

    @property
    def _index(self) -> dict[str, int]:
        idx = self.__dict__.get("_idx")
        if idx is None:
            idx = {a: i for i, a in enumerate(self.labels)}
            object.__setattr__(self, "_idx", idx)
        return idx

    def cylinder(self, label: str) -> tuple[Fraction, Fraction]:
        e = self.offset(label)
        return e, e + self.cylinder_length

    def cylinders(self) -> dict[str, tuple[Fraction, Fraction]]:
        return {a: self.cylinder(a) for a in self.labels}

    def word_offset(self, word: Sequence[str]) -> Fraction:
        """Left endpoint of ``I(a_1 ... a_n)``."""
        total, scale = Fraction(0), Fraction(1)
        for a in word:
            total += scale * self.offset(a)
            scale *= self.ratio
        return total

    def word_cylinder(self, word: Sequence[str]) -> tuple[Fraction, Fraction]:
        e = self.word_offset(word)
        return e, e + self.ratio ** len(word) * self.hull

    def sorted_labels(self) -> list[str]:
        return sorted(self.labels, key=self.offset)

    def endmost(self) -> tuple[str, str]:
        order = self.sorted_labels()
        return order[0], order[-1]

    def dimension(self) -> float:
        """Hausdorff dimension ``log|A| / log(1/ratio)`` (decimal rendering)."""
        if self.size == 1:
            return 0.0
        return math.log(self.size) / math.log(1 / self.ratio)

    def normalized(self) -> "HomogeneousIFS":
        """The same set rescaled to hull ``[0, 1]``."""
        if self.hull == 1:
            return self
        return HomogeneousIFS(self.labels, self.ratio,
                              tuple(e / self.hull for e in self.offsets), Fraction(1))

    def scaled(self, factor: RationalLike) -> "HomogeneousIFS":
        f = as_fraction(factor)
        return HomogeneousIFS(self.labels, self.ratio,
                              tuple(e * f for e in self.offsets), self.hull * f)

    def mirrored(self) -> "HomogeneousIFS":
        """Reflection ``x -> hull - x``; letters keep their names."""
        L = self.cylinder_length
        return HomogeneousIFS(self.labels, self.ratio,
                              tuple(self.hull - e - L for e in self.offsets), self.hull)


def validate(ifs: HomogeneousIFS) -> list[Violation]:
    """All violated invariants; an empty list means the IFS is valid."""
    out: list[Violation] = []
    if not (0 < ifs.ratio < 1):
        out.append(Violation("ratio", (), f"ratio {fmt(ifs.ratio)} not in (0,1)"))
    if ifs.hull <= 0:
        out.append(Violation("hull", (), f"hull {fmt(ifs.hull)} not positive"))
    if ifs.size == 0:
        out.append(Violation("alphabet", (), "empty alphabet"))
        return out
    if ifs.size * ifs.ratio >= 1:
        out.append(Violation("dimension", (),
                             f"|A|*ratio = {fmt(ifs.size * ifs.ratio)} >= 1"))
    cyl = sorted(((ifs.cylinder(a), a) for a in ifs.labels))
    for ((lo, hi), a) in cyl:
        if lo < 0 or hi > ifs.hull:
            out.append(Violation("containment", (a,),
                                 f"I({a}) = [{fmt(lo)}, {fmt(hi)}] leaves [0, {fmt(ifs.hull)}]"))
    for ((lo1, hi1), a), ((lo2, hi2), b) in zip(cyl, cyl[1:]):
        if lo2 <= hi1:
            out.append(Violation("disjointness", (a, b),
                                 f"I({a}) = [{fmt(lo1)}, {fmt(hi1)}] meets I({b}) = [{fmt(lo2)}, {fmt(hi2)}]"))
    if cyl[0][0][0] != 0:
        out.append(Violation("hull", (cyl[0][1],), "leftmost cylinder does not start at 0"))
    if cyl[-1][0][1] != ifs.hull:
        out.append(Violation("hull", (cyl[-1][1],),
                             f"rightmost cylinder ends at {fmt(cyl[-1][0][1])}, not {fmt(ifs.hull)}"))
    return out


def is_valid(ifs: HomogeneousIFS) -> bool:
    return not validate(ifs)


def make_ifs(offsets: Sequence[RationalLike], ratio: RationalLike, hull: RationalLike = 1,
             labels: Sequence[str] | None = None) -> HomogeneousIFS:
    if labels is None:
        labels = [str(i) for i in range(len(offsets))]
    return HomogeneousIFS(tuple(labels), as_fraction(ratio),
                          tuple(as_fraction(e) for e in offsets), as_fraction(hull))


def middle_alpha(a: RationalLike) -> HomogeneousIFS:
    """Middle-alpha Cantor set ``C_a`` on ``[0, 1]`` with ``a = (1 - alpha)/2``."""
    a = as_fraction(a)
    if not (0 < a < Fraction(1, 2)):
        raise IFSError(f"middle-alpha parameter {fmt(a)} not in (0, 1/2)")
    return HomogeneousIFS(("0", "1"), a, (Fraction(0), 1 - a), Fraction(1), alpha=a)


def _join(labels: Sequence[str]) -> str:
    return "".join(labels)


def refine(ifs: HomogeneousIFS, n: int) -> HomogeneousIFS:
    """Depth-``n`` presentation: alphabet ``A^n``, ratio ``ratio^n``."""
    if n < 1:
        raise IFSError("refinement depth must be >= 1")
    if n == 1:
        return ifs
    words = list(itertools.product(ifs.labels, repeat=n))
    names = [_join(w) for w in words]
    if len(set(names)) != len(names):
        names = [".".join(w) for w in words]
    offsets = tuple(ifs.word_offset(w) for w in words)
    return HomogeneousIFS(tuple(names), ifs.ratio ** n, offsets, ifs.hull)


def _power_exponents(x: Fraction, y: Fraction, cap: int) -> tuple[int, int] | None:
    """Smallest ``(q, p)`` with ``x**q == y**p`` and ``p, q <= cap``."""
    for total in range(2, 2 * cap + 1):
        for q in range(max(1, total - cap), min(cap, total - 1) + 1):
            p = total - q
            if x ** q == y ** p:
                return q, p
    return None


def common_ratio(ifs1: HomogeneousIFS, ifs2: HomogeneousIFS,
                 cap: int = 12) -> tuple[HomogeneousIFS, HomogeneousIFS]:
    """Refine both sets to a common ratio ``lambda**q == lambda'**p``."""
    found = _power_exponents(ifs1.ratio, ifs2.ratio, cap)
    if found is None:
        raise Incommensurable(
            f"no q, p <= {cap} with ({fmt(ifs1.ratio)})^q = ({fmt(ifs2.ratio)})^p")
    q, p = found
    return refine(ifs1, q), refine(ifs2, p)


def perturb(ifs: HomogeneousIFS, subset, omega: Mapping[str, RationalLike],
            c0: RationalLike, step: RationalLike | None = None) -> HomogeneousIFS:
    """Translate the cylinders in ``subset`` by ``c0 * step * omega(a) * hull``.

    ``step`` defaults to the IFS ratio.  When the IFS is a presentation by
    ``rho**(1/2)``-contractions the caller passes ``step = ratio**2``.
    """
    c0 = as_fraction(c0)
    step = ifs.ratio if step is None else as_fraction(step)
    subset = set(subset)
    unknown = subset - set(ifs.labels)
    if unknown:
        raise PerturbationError(f"unknown labels {sorted(unknown)}")
    stray = set(omega) - subset
    if any(as_fraction(omega[a]) != 0 for a in stray):
        raise PerturbationError(f"omega supported outside the subset: {sorted(stray)}")
    ends = set(ifs.endmost())
    if subset & ends:
        raise PerturbationError(f"endmost labels cannot be perturbed: {sorted(subset & ends)}")
    offsets = []
    for a, e in zip(ifs.labels, ifs.offsets):
        w = as_fraction(omega.get(a, 0)) if a in subset else Fraction(0)
        if abs(w) > 1:
            raise PerturbationError(f"omega({a}) = {fmt(w)} outside [-1, 1]")
        offsets.append(e + c0 * step * w * ifs.hull)
    out = HomogeneousIFS(ifs.labels, ifs.ratio, tuple(offsets), ifs.hull)
    bad = validate(out)
    if bad:
        raise PerturbationError("; ".join(v.detail for v in bad))
    return out


def closeness(ifs1: HomogeneousIFS, ifs2: HomogeneousIFS) -> Fraction | None:
    """``max_a |t_a| / |I(a)|`` when the two sets are comparable, else ``None``."""
    if ifs1.hull != ifs2.hull or set(ifs1.labels) != set(ifs2.labels):
        return None
    if ifs1.cylinder_length != ifs2.cylinder_length:
        return None
    L = ifs1.cylinder_length
    return max(abs(ifs2.offset(a) - ifs1.offset(a)) / L for a in ifs1.labels)


# -- config files ----------------------------------------------------------

def to_config(ifs: HomogeneousIFS) -> dict:
    ratio = f"alpha {fmt(ifs.alpha)}" if ifs.alpha is not None else fmt(ifs.ratio)
    return {
        "hull": fmt(ifs.hull),
        "ratio": ratio,
        "offsets": [fmt(e) for e in ifs.offsets],
        "labels": list(ifs.labels),
    }


def from_config(data: Mapping) -> HomogeneousIFS:
    try:
        return _from_config(data)
    except IFSError:
        raise
    except (KeyError, ValueError, TypeError, ZeroDivisionError) as exc:
        raise IFSError(f"bad IFS config: {exc}") from exc


def _from_config(data: Mapping) -> HomogeneousIFS:
    try:
        hull = as_fraction(data.get("hull", "1"))
        raw = str(data["ratio"]).strip()
    except (KeyError, ValueError, TypeError) as exc:
        raise IFSError(f"bad IFS config: {exc}") from exc
    alpha = None
    if raw.startswith("alpha"):
        alpha = as_fraction(raw[len("alpha"):])
        base = middle_alpha(alpha).scaled(hull)
        ratio = base.ratio
        offsets = data.get("offsets", [fmt(e) for e in base.offsets])
    else:
        ratio = as_fraction(raw)
        offsets = data.get("offsets")
        if offsets is None:
            raise IFSError("bad IFS config: offsets missing")
    offsets = tuple(as_fraction(e) for e in offsets)
    labels = data.get("labels") or [str(i) for i in range(len(offsets))]
    ifs = HomogeneousIFS(tuple(str(a) for a in labels), ratio, offsets, hull, alpha=alpha)
    if alpha is not None and ifs != middle_alpha(alpha).scaled(hull) and len(offsets) == 2:
        # offsets override the alpha shorthand; drop the shorthand so it is not re-emitted
        ifs = HomogeneousIFS(ifs.labels, ifs.ratio, ifs.offsets, ifs.hull)
    return ifs


def dumps(ifs: HomogeneousIFS) -> str:
    """Canonical config text; ``dumps(loads(dumps(x))) == dumps(x)``."""
    return json.dumps(to_config(ifs), indent=2) + "\n"


def loads(text: str) -> HomogeneousIFS:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise IFSError(f"bad IFS config: {exc}") from exc
    return from_config(data)


def load(path) -> HomogeneousIFS:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def save(ifs: HomogeneousIFS, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(ifs))


# -- constants -------------------------------------------------------------

@dataclass(frozen=True)
class ConstantsConfig:
    """User-facing constants; ``None`` selects the derived default."""

    c0: Fraction | None = None
    c2: Fraction | None = None

    def amplitude(self, s0: RationalLike) -> Fraction:
        """``c0``, defaulting to ``3 + 2*s0``."""
        return as_fraction(self.c0) if self.c0 is not None else 3 + 2 * as_fraction(s0)

    def validate(self, s0: RationalLike) -> list[str]:
        out = []
        c0 = self.amplitude(s0)
        if c0 < 3 + 2 * as_fraction(s0):
            out.append(f"c0 = {fmt(c0)} is below 3 + 2*s0; returns may not sweep L0")
        if self.c2 is not None and as_fraction(self.c2) <= 0:
            out.append("c2 must be positive")
        return out


def pair_scale(K: HomogeneousIFS, Kp: HomogeneousIFS) -> Fraction:
    """``rho^{-(d+d'-1)/2}`` for ``rho^{1/2}``-presentations, i.e. ``|A||A'| r``."""
    return K.size * Kp.size * K.ratio


def threshold_N(K: HomogeneousIFS, Kp: HomogeneousIFS, c2: RationalLike) -> int:
    """``N = ceil(c2^2 * rho^{-(d+d'-1)/2})``."""
    return math.ceil(as_fraction(c2) ** 2 * pair_scale(K, Kp))


def auto_c2(K: HomogeneousIFS, Kp: HomogeneousIFS, target: int = 2,
            denominator: int = 100) -> Fraction:
    """Smallest ``k/denominator`` giving ``N >= target``."""
    x = pair_scale(K, Kp)
    k = max(1, math.isqrt(math.floor((target - 1) * denominator**2 / x)) - 1)
    while math.ceil(Fraction(k, denominator) ** 2 * x) < target:
        k += 1
    return Fraction(k, denominator)
