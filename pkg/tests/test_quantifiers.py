from __future__ import annotations

from fractions import Fraction

import pytest

from visquant import (
    QuantifierLabel,
    SetCounts,
    UndefinedRestrictorError,
    feasible_counts,
    quantize_ratio,
    ratio_range,
    scale_distance,
)


def piecewise(m: int, k: int) -> str:
    # Integer-only reference: k/m <= 17/100 iff 100k <= 17m.
    if k == 0:
        return "no"
    if k == m:
        return "all"
    if 100 * k <= 17 * m:
        return "few"
    if 100 * k >= 70 * m:
        return "most"
    return "some"


class TestQuantizeRatio:
    def test_six_objects(self) -> None:
        expected = ["no", "few", "some", "some", "some", "most", "all"]
        assert [quantize_ratio(SetCounts(6, k)).word for k in range(7)] == expected

    def test_all_takes_precedence(self) -> None:
        assert quantize_ratio(SetCounts(1, 1)) is QuantifierLabel.all

    def test_exhaustive_oracle(self) -> None:
        mismatches = [
            (m, k)
            for m in range(1, 17)
            for k in range(m + 1)
            if quantize_ratio(SetCounts(m, k)).word != piecewise(m, k)
        ]
        assert mismatches == []

    def test_inclusive_thresholds(self) -> None:
        assert quantize_ratio(SetCounts(100, 17)) is QuantifierLabel.few
        assert quantize_ratio(SetCounts(100, 18)) is QuantifierLabel.some
        assert quantize_ratio(SetCounts(10, 7)) is QuantifierLabel.most
        assert quantize_ratio(SetCounts(100, 69)) is QuantifierLabel.some

    def test_empty_restrictor(self) -> None:
        with pytest.raises(UndefinedRestrictorError):
            quantize_ratio(SetCounts(0, 0))

    def test_monotone(self) -> None:
        for m in range(1, 17):
            labels = [quantize_ratio(SetCounts(m, k)) for k in range(m + 1)]
            assert labels == sorted(labels)

    def test_five_objects_never_few(self) -> None:
        assert all(quantize_ratio(SetCounts(5, k)) is not QuantifierLabel.few for k in range(6))

    def test_invalid_counts(self) -> None:
        with pytest.raises(ValueError):
            SetCounts(3, 4)


class TestScale:
    @pytest.mark.parametrize(
        ("a", "b", "distance"),
        [
            (QuantifierLabel.no, QuantifierLabel.no, 0),
            (QuantifierLabel.few, QuantifierLabel.some, 1),
            (QuantifierLabel.no, QuantifierLabel.all, 4),
            (QuantifierLabel.most, QuantifierLabel.few, 2),
        ],
    )
    def test_distance(self, a: QuantifierLabel, b: QuantifierLabel, distance: int) -> None:
        assert scale_distance(a, b) == distance

    def test_words(self) -> None:
        assert [label.word for label in QuantifierLabel] == ["no", "few", "some", "most", "all"]
        assert QuantifierLabel.from_word(" Most ") is QuantifierLabel.most

        with pytest.raises(ValueError):
            QuantifierLabel.from_word("many")


class TestFeasibleCounts:
    def test_few_enumeration(self) -> None:
        expected = [
            (m, k) for m in range(6, 17) for k in range(1, m) if Fraction(k, m) <= Fraction(17, 100)
        ]
        assert [(c.m, c.k) for c in feasible_counts(QuantifierLabel.few)] == expected
        assert (6, 1) in expected and (16, 2) in expected

    def test_every_label_reachable_from_six(self) -> None:
        for label in QuantifierLabel:
            assert feasible_counts(label, min_m=6, max_m=6)

    def test_few_unreachable_below_six(self) -> None:
        assert feasible_counts(QuantifierLabel.few, min_m=1, max_m=5) == []

    def test_ranges_contain_their_ratios(self) -> None:
        for label in QuantifierLabel:
            r = ratio_range(label)
            assert all(c.ratio in r for c in feasible_counts(label, min_m=1, max_m=16))

        assert Fraction(17, 100) in ratio_range(QuantifierLabel.few)
        assert Fraction(17, 100) not in ratio_range(QuantifierLabel.some)
        assert Fraction(7, 10) in ratio_range(QuantifierLabel.most)
