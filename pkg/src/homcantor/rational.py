"""Exact rational parsing and rendering shared by the file formats."""
from __future__ import annotations

from fractions import Fraction
from typing import Union

RationalLike = Union[int, str, Fraction]


def as_fraction(x: RationalLike) -> Fraction:
    """Coerce ints, ``"p/q"`` / decimal strings and Fractions to a Fraction.

    Floats are refused: they would smuggle binary rounding into exact data.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


def fmt(x: Fraction) -> str:
    """Canonical ``"p/q"`` rendering (integers render without a denominator)."""
    return str(Fraction(x))


def decimal(x: Fraction, places: int = 6) -> str:
    """Presentation-only decimal rendering, rounded half-even."""
    x = Fraction(x)
    scaled = round(x * 10**places)
    sign = "-" if scaled < 0 else ""
    scaled = abs(scaled)
    whole, frac = divmod(scaled, 10**places)
    if places == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{places}d}"
