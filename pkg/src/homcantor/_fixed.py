"""Exact fixed-point encoding of rationals over a common denominator.

The hot loops work on integer numerators ``x * Q``.  Arrays are ``int64``
when every magnitude is below ``2**61`` (so pairwise sums cannot overflow)
and Python-object arrays otherwise.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

INT64_SAFE = 1 << 61


def common_denominator(*groups: Iterable[Fraction]) -> int:
    q = 1
    for group in groups:
        for x in group:
            q = math.lcm(q, Fraction(x).denominator)
    return q


def encode(values: Sequence[Fraction], q: int) -> list[int]:
    out = []
    for x in values:
        x = Fraction(x)
        num, rem = divmod(x.numerator * q, x.denominator)
        if rem:
            raise ValueError(f"{x} is not representable over denominator {q}")
        out.append(num)
    return out


def as_arrays(*int_lists: Sequence[int]) -> list[np.ndarray]:
    """Arrays sharing one dtype: int64 if everything is small, else object."""
    small = all(abs(v) < INT64_SAFE for lst in int_lists for v in lst)
    dtype = np.int64 if small else object
    return [np.array(list(lst), dtype=dtype) for lst in int_lists]


def decode(x, q: int) -> Fraction:
    return Fraction(int(x), q)
