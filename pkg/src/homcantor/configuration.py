"""Relative configurations of two homogeneous Cantor sets.

A configuration of ``(K, K')`` is collapsed to one rational ``u``: place ``K``
with hull ``[0, 1]`` and read off the left endpoint of the placed ``K'``.  For
points ``x in K`` and ``x' in K'`` this is ``u = x - x'``.  Zooming into
cylinders ``I(a)`` and ``I'(a')`` acts on ``u`` by

    u  ->  (u + e'_{a'} - e_a) / ratio.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .ifs import HomogeneousIFS, IFSError
from .intervals import IntervalUnion
from .rational import RationalLike, as_fraction, fmt


class FrontierTooLarge(RuntimeError):
    """The orbit frontier outgrew its cap; ``partial`` holds the last full level."""

    def __init__(self, message: str, depth: int, partial: list["OrbitNode"]):
        super().__init__(message)
        self.depth = depth
        self.partial = partial


@dataclass(frozen=True)
class ConfigSpace:
    """The pair ``(K, K')`` in the frame where ``con(K) = [0, 1]``."""

    K: HomogeneousIFS
    Kp: HomogeneousIFS

    def __post_init__(self):
        if self.K.ratio != self.Kp.ratio:
            raise IFSError("configuration space needs a common ratio; refine first")
        if self.K.hull != 1:
            s = self.K.hull
            object.__setattr__(self, "K", self.K.normalized())
            object.__setattr__(self, "Kp", self.Kp.scaled(1 / s))

    @property
    def ratio(self) -> Fraction:
        return self.K.ratio

    @property
    def s0(self) -> Fraction:
        return self.Kp.hull

    @property
    def bound(self) -> Fraction:
        """Linkedness bound ``1 + s0`` on ``|u|`` along bounded orbits."""
        return 1 + self.s0


@dataclass(frozen=True)
class RelativeConfig:
    u: Fraction
    space: ConfigSpace

    def __repr__(self) -> str:
        return f"RelativeConfig({fmt(self.u)})"


def _u(x) -> Fraction:
    return x.u if isinstance(x, RelativeConfig) else as_fraction(x)


def config_of_pair(space: ConfigSpace, x: RationalLike, xp: RationalLike) -> RelativeConfig:
    x, xp = as_fraction(x), as_fraction(xp)
    if not (0 <= x <= space.K.hull and 0 <= xp <= space.Kp.hull):
        raise ValueError("points must lie in the hulls")
    return RelativeConfig(x - xp, space)


def renormalize(space: ConfigSpace, u, a: str, ap: str) -> Fraction:
    return (_u(u) + space.Kp.offset(ap) - space.K.offset(a)) / space.ratio


def renormalize_word(space: ConfigSpace, u, b: Sequence[str], bp: Sequence[str]) -> Fraction:
    """Closed form ``(u + e'_{b'} - e_b) / ratio**len(b)`` with word offsets."""
    if len(b) != len(bp):
        raise ValueError("words must have equal length")
    return ((_u(u) + space.Kp.word_offset(bp) - space.K.word_offset(b))
            / space.ratio ** len(b))


def renormalize_steps(space: ConfigSpace, u, b: Sequence[str], bp: Sequence[str]) -> Fraction:
    """The same map as :func:`renormalize_word`, applied letter by letter."""
    if len(b) != len(bp):
        raise ValueError("words must have equal length")
    u = _u(u)
    for a, ap in zip(b, bp):
        u = renormalize(space, u, a, ap)
    return u


def is_linked(space: ConfigSpace, u) -> bool:
    """``[0, 1]`` meets ``[u, u + s0]`` (closed: touching counts)."""
    u = _u(u)
    return -space.s0 <= u <= 1


@dataclass(frozen=True)
class OrbitNode:
    config: Fraction
    path: tuple[tuple[str, ...], tuple[str, ...]]

    @property
    def depth(self) -> int:
        return len(self.path[0])


def _letter_pairs(space: ConfigSpace):
    return list(itertools.product(space.K.labels, space.Kp.labels))


def iter_frontiers(space: ConfigSpace, u, depth: int, cap: int = 10**6) -> Iterator[list[OrbitNode]]:
    """Yield the linked frontier at depths ``0..depth`` (stops after an empty one).

    Equal configurations at equal depth are kept once, with the
    lexicographically first path.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    u = _u(u)
    level = [OrbitNode(u, ((), ()))] if is_linked(space, u) else []
    pairs = _letter_pairs(space)
    shifts = [(a, ap, space.Kp.offset(ap) - space.K.offset(a)) for a, ap in pairs]
    rho = space.ratio
    lo, hi = -space.s0, Fraction(1)
    yield level
    for d in range(1, depth + 1):
        if not level:
            return
        seen: dict[Fraction, OrbitNode] = {}
        for node in level:
            w, wp = node.path
            for a, ap, sh in shifts:
                v = (node.config + sh) / rho
                if lo <= v <= hi and v not in seen:
                    seen[v] = OrbitNode(v, (w + (a,), wp + (ap,)))
            if len(seen) > cap:
                raise FrontierTooLarge(
                    f"frontier at depth {d} exceeds cap {cap}", d - 1, level)
        level = list(seen.values())
        yield level


def orbit_frontier(space: ConfigSpace, u, depth: int, cap: int = 10**6) -> list[OrbitNode]:
    """Surviving linked nodes at exactly ``depth``, ordered by path."""
    level: list[OrbitNode] = []
    for d, level in enumerate(iter_frontiers(space, u, depth, cap)):
        if not level:
            return []
    if d < depth:
        return []
    return level


@dataclass(frozen=True)
class Intersecting:
    node: OrbitNode


@dataclass(frozen=True)
class NotIntersecting:
    depth: int


@dataclass(frozen=True)
class Unknown:
    depth: int
    frontier_size: int


def intersect_certify(space: ConfigSpace, u, L: IntervalUnion | None, depth: int,
                      cap: int = 10**6):
    """Decide whether ``u`` lies in ``K - K'`` using orbits up to ``depth``.

    ``L`` must be a certified recurrent set for this pair; without it no
    positive answer is ever given.
    """
    size = 0
    for d, level in enumerate(iter_frontiers(space, u, depth, cap)):
        if not level:
            return NotIntersecting(d)
        if L is not None:
            for node in level:
                if node.config in L:
                    return Intersecting(node)
        size = len(level)
    return Unknown(depth, size)


def frontier_to_json(nodes: Sequence[OrbitNode]) -> list[dict]:
    """Path lists for debugging output."""
    return [{"config": fmt(n.config), "word": list(n.path[0]), "word_prime": list(n.path[1])}
            for n in nodes]
