"""
MIT License

Copyright (c) 2024-Present visquant contributors

Permission is hereby granted, free of charge, to any person obtaining a copy
of this software and associated documentation files (the "Software"), to deal
in the Software without restriction, including without limitation the rights
to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
copies of the Software, and to permit persons to whom the Software is
furnished to do so, subject to the following conditions:

The above copyright notice and this permission notice shall be included in all
copies or substantial portions of the Software.

THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
SOFTWARE.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .enums import QuantifierLabel
from .exceptions import UndefinedRestrictorError

__all__ = (
    "FEW_THRESHOLD",
    "MOST_THRESHOLD",
    "MIN_RESTRICTOR",
    "SetCounts",
    "RatioRange",
    "quantize_ratio",
    "scale_distance",
    "feasible_counts",
    "ratio_range",
)


FEW_THRESHOLD: Fraction = Fraction(17, 100)
MOST_THRESHOLD: Fraction = Fraction(70, 100)

# Smallest restrictor cardinality for which every label is reachable.
MIN_RESTRICTOR: int = 6


@dataclass(frozen=True, order=True)
class SetCounts:
    """Cardinalities of the restrictor set and of its intersection with the scope.

    Attributes
    ----------
    m: int
        The number of restrictor objects.
    k: int
        The number of restrictor objects holding the scope property.
    """

    m: int
    k: int

    def __post_init__(self) -> None:
        if self.m < 0 or not 0 <= self.k <= max(self.m, 0):
            raise ValueError(f"Invalid set counts m={self.m}, k={self.k}: expected 0 <= k <= m.")

    @property
    def ratio(self) -> Fraction:
        if self.m == 0:
            raise UndefinedRestrictorError("The ratio of an empty restrictor set is undefined.")

        return Fraction(self.k, self.m)


class RatioRange(NamedTuple):
    low: Fraction
    high: Fraction
    low_inclusive: bool
    high_inclusive: bool

    def __contains__(self, value: object) -> bool:
        if not isinstance(value, Fraction | int):
            return False

        above: bool = value >= self.low if self.low_inclusive else value > self.low
        below: bool = value <= self.high if self.high_inclusive else value < self.high
        return above and below


def quantize_ratio(counts: SetCounts) -> QuantifierLabel:
    """Map restrictor and target cardinalities to a quantifier.

    ``no`` and ``all`` take precedence. Otherwise ratios up to and including 17% are ``few``, ratios of 70% and
    above are ``most`` and everything in between is ``some``. The ratio is compared exactly, as a fraction.

    Parameters
    ----------
    counts: :class:`SetCounts`
        The cardinalities to quantify.

    Returns
    -------
    :class:`~visquant.QuantifierLabel`
        The quantifier for the proportion ``k / m``.

    Raises
    ------
    UndefinedRestrictorError
        ``m`` is zero.
    """
    if counts.m == 0:
        raise UndefinedRestrictorError("Can not quantify over an empty restrictor set (m=0).")

    if counts.k == 0:
        return QuantifierLabel.no

    if counts.k == counts.m:
        return QuantifierLabel.all

    ratio: Fraction = Fraction(counts.k, counts.m)

    if ratio <= FEW_THRESHOLD:
        return QuantifierLabel.few

    if ratio >= MOST_THRESHOLD:
        return QuantifierLabel.most

    return QuantifierLabel.some


def scale_distance(a: QuantifierLabel, b: QuantifierLabel) -> int:
    """The number of steps between two labels on the quantifier scale."""
    return abs(int(a) - int(b))


def feasible_counts(label: QuantifierLabel, *, min_m: int = MIN_RESTRICTOR, max_m: int = 16) -> list[SetCounts]:
    """All ``(m, k)`` pairs with ``min_m <= m <= max_m`` that quantize to ``label``, ordered by ``m`` then ``k``."""
    return [
        SetCounts(m, k)
        for m in range(max(min_m, 1), max_m + 1)
        for k in range(m + 1)
        if quantize_ratio(SetCounts(m, k)) is label
    ]


_RANGES: dict[QuantifierLabel, RatioRange] = {
    QuantifierLabel.no: RatioRange(Fraction(0), Fraction(0), True, True),
    QuantifierLabel.few: RatioRange(Fraction(0), FEW_THRESHOLD, False, True),
    QuantifierLabel.some: RatioRange(FEW_THRESHOLD, MOST_THRESHOLD, False, False),
    QuantifierLabel.most: RatioRange(MOST_THRESHOLD, Fraction(1), True, False),
    QuantifierLabel.all: RatioRange(Fraction(1), Fraction(1), True, True),
}


def ratio_range(label: QuantifierLabel) -> RatioRange:
    """The exact range of ratios ``k / m`` mapped to ``label``."""
    return _RANGES[label]
