from __future__ import annotations

from collections import Counter
from pathlib import Path

import numpy as np
import pytest

from visquant import (
    Catalog,
    Corpus,
    DotConfig,
    LeakageError,
    QuantifierLabel,
    SplitError,
    SplitResult,
    SplitSetting,
    SplitSpec,
    SynthConfig,
    check_leakage,
    generate_corpus,
    generate_dot_corpus,
    partition_units,
    read_manifests,
    split,
    write_manifests,
)

@pytest.fixture(scope="module")
def large(catalog: Catalog, world: SynthConfig) -> Corpus:
    return generate_corpus(120, catalog, world, seed=11)


def label_counts(corpus: Corpus, ids: tuple[int, ...]) -> Counter[QuantifierLabel]:
    return Counter(corpus[i].label for i in ids)


def assert_balanced(corpus: Corpus, result: SplitResult) -> None:
    for _, ids in result.items():
        counts = label_counts(corpus, ids)
        assert set(counts) == set(QuantifierLabel)
        assert max(counts.values()) - min(counts.values()) <= 1


class TestPartitionUnits:
    def test_counts(self) -> None:
        train, heldout = partition_units(list(range(160)), 0.7, np.random.default_rng(0))

        assert (len(train), len(heldout)) == (112, 48)
        assert sorted(train + heldout) == list(range(160))

    def test_rounding_favors_training(self) -> None:
        train, heldout = partition_units(list(range(10)), 0.75, np.random.default_rng(0))

        assert (len(train), len(heldout)) == (8, 2)

    @pytest.mark.parametrize(("units", "fraction"), [([1], 0.5), ([1, 2, 3], 1.0)])
    def test_nothing_held_out(self, units: list[int], fraction: float) -> None:
        with pytest.raises(SplitError):
            partition_units(units, fraction, np.random.default_rng(0))


class TestUNC:
    def test_keys_are_disjoint(self, large: Corpus) -> None:
        result = split(large, SplitSpec(seed=3))
        keys = {name: {large[i].key for i in ids} for name, ids in result.items()}

        assert not keys["train"] & keys["val"]
        assert not keys["train"] & keys["test"]
        assert not keys["val"] & keys["test"]
        assert result.heldout == ()

    def test_fractions(self, large: Corpus) -> None:
        result = split(large, SplitSpec(seed=3))

        assert label_counts(large, result.train) == {label: 84 for label in QuantifierLabel}
        assert len(result.val) == len(result.test) == 90
        assert_balanced(large, result)

    def test_deterministic(self, large: Corpus) -> None:
        assert split(large, SplitSpec(seed=9)) == split(large, SplitSpec(seed=9))
        assert split(large, SplitSpec(seed=9)).train != split(large, SplitSpec(seed=10)).train

    def test_too_small(self, catalog: Catalog, world: SynthConfig) -> None:
        tiny = generate_corpus(2, catalog, world, seed=1)

        with pytest.raises(SplitError):
            split(tiny, SplitSpec())


class TestHeldOut:
    def test_unseen_objects(self, large: Corpus) -> None:
        result = split(large, SplitSpec(SplitSetting.UnsObj, seed=4))
        train = {large[i].restrictor for i in result.train}
        heldout = {large[i].restrictor for i in result.val + result.test}

        assert not train & heldout
        assert heldout <= set(result.heldout)
        assert len(result.heldout) == 24 - 17
        assert_balanced(large, result)

    def test_unseen_properties(self, large: Corpus) -> None:
        result = split(large, SplitSpec(SplitSetting.UnsProp, seed=4))
        train = {large[i].scope for i in result.train}
        heldout = {large[i].scope for i in result.val + result.test}

        assert not train & heldout
        assert_balanced(large, result)

    def test_unseen_queries(self, large: Corpus) -> None:
        result = split(large, SplitSpec(SplitSetting.UnsQue, seed=4))
        train = {large[i].query for i in result.train}
        heldout = {large[i].query for i in result.val + result.test}

        assert not train & heldout
        assert {o for o, _ in heldout} <= {o for o, _ in train}
        assert {p for _, p in heldout} <= {p for _, p in train}
        assert_balanced(large, result)

    def test_exclude_heldout_distractors(self, large: Corpus) -> None:
        spec = SplitSpec(SplitSetting.UnsObj, seed=4, exclude_heldout_distractors=True)
        result = split(large, spec)
        held = set(result.heldout)

        assert all(s.obj not in held for i in result.train for s in large[i].scenario.slots)
        assert len(result.train) <= len(split(large, SplitSpec(SplitSetting.UnsObj, seed=4)).train)

    def test_dot_corpus_needs_unc(self) -> None:
        dots = generate_dot_corpus(3, DotConfig(), seed=0)

        assert len(split(dots, SplitSpec()).train) == 5
        with pytest.raises(SplitError):
            split(dots, SplitSpec(SplitSetting.UnsObj))


class TestLeakage:
    def test_shared_ids(self, large: Corpus) -> None:
        result = split(large, SplitSpec())
        leaky = SplitResult(result.train, result.val + result.train[:1], result.test, result.spec)

        with pytest.raises(LeakageError) as info:
            check_leakage(large, leaky)

        assert info.value.overlap == [result.train[0]]

    def test_heldout_object_in_training(self, large: Corpus) -> None:
        result = split(large, SplitSpec(SplitSetting.UnsObj, seed=2))
        held = set(result.heldout)
        intruder = next(d.identifier for d in large if d.restrictor in held and d.identifier not in result.val)
        test = tuple(i for i in result.test if i != intruder)
        leaky = SplitResult(result.train + (intruder,), result.val, test, result.spec, result.heldout)

        with pytest.raises(LeakageError):
            check_leakage(large, leaky)


class TestManifests:
    def test_round_trip(self, large: Corpus, tmp_path: Path) -> None:
        result = split(large, SplitSpec(SplitSetting.UnsQue, seed=6))
        paths = write_manifests(result, tmp_path / "splits", corpus=tmp_path / "corpus")

        assert [p.name for p in paths] == ["train.txt", "val.txt", "test.txt"]

        loaded, header = read_manifests(tmp_path / "splits")
        assert loaded == result
        assert header["corpus"] == str((tmp_path / "corpus").resolve())
        assert header["partition"] == "train"

    def test_missing(self, tmp_path: Path) -> None:
        with pytest.raises(SplitError):
            read_manifests(tmp_path)

    def test_mismatched_headers(self, large: Corpus, tmp_path: Path) -> None:
        write_manifests(split(large, SplitSpec(seed=1)), tmp_path / "a", corpus="x")
        write_manifests(split(large, SplitSpec(seed=2)), tmp_path / "b", corpus="x")
        (tmp_path / "a" / "test.txt").write_bytes((tmp_path / "b" / "test.txt").read_bytes())

        with pytest.raises(SplitError):
            read_manifests(tmp_path / "a")
