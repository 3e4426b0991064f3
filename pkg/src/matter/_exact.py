from __future__ import annotations

from fractions import Fraction


def exact_fraction(value: float) -> Fraction:
    """The decimal a user typed (``0.2``), not its binary approximation.

    Budget arithmetic is done on these exact rationals; because float
    rounding is monotone, ``x/k <= 0.2`` then also holds between floats.
    """
    return Fraction(repr(float(value)))
