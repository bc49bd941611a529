from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from visquant import (
    Architecture,
    ConfigError,
    Corpus,
    ModelSpec,
    Provenance,
    QuantifierLabel,
    Sample,
    SetCounts,
    boundary_dips,
    build_model,
    compare_reports,
    distractor_table,
    evaluate,
    feasible_counts,
    quantize_ratio,
    ratio_bins_from_predictions,
    ratio_span_analysis,
    read_json,
    report_from_predictions,
    write_plot_data,
    write_report,
)

L = QuantifierLabel


def make(m: int, k: int, distractors: int = 0, identifier: int = 0) -> Sample:
    counts = SetCounts(m, k)
    return Sample(
        identifier=identifier, label=quantize_ratio(counts), counts=counts, distractors_with_scope=distractors
    )


@pytest.fixture
def balanced() -> list[Sample]:
    out: list[Sample] = []
    for label in QuantifierLabel:
        for i, counts in enumerate(feasible_counts(label)[:3]):
            out.append(Sample(identifier=len(out), label=label, counts=counts, distractors_with_scope=i))

    return out


class TestReport:
    def test_constant_predictor(self, balanced: list[Sample]) -> None:
        report = report_from_predictions(balanced, [L.some] * len(balanced))

        assert report.accuracy == pytest.approx(0.2)
        assert report.confusion[:, int(L.some)].tolist() == [3] * 5
        assert report.per_quantifier == {L.no: 0.0, L.few: 0.0, L.some: 1.0, L.most: 0.0, L.all: 0.0}
        assert report.adjacency == [3, 6, 6, 0, 0]

    def test_diagonal(self, balanced: list[Sample]) -> None:
        rng = np.random.default_rng(8)
        predictions = [L(int(i)) for i in rng.integers(5, size=len(balanced))]
        report = report_from_predictions(balanced, predictions)

        assert report.correct == sum(p is s.label for p, s in zip(predictions, balanced))
        assert report.accuracy == np.trace(report.confusion) / len(balanced)
        assert sum(report.adjacency) == report.total == len(balanced)
        assert report.adjacency[0] == report.correct
        assert report.support == {label: 3 for label in QuantifierLabel}

    def test_absent_label(self) -> None:
        report = report_from_predictions([make(6, 0)], [L.no])

        assert report.per_quantifier[L.no] == 1.0
        assert report.per_quantifier[L.all] is None

    def test_length_mismatch(self, balanced: list[Sample]) -> None:
        with pytest.raises(ValueError):
            report_from_predictions(balanced, [L.no])

    def test_payload(self, balanced: list[Sample]) -> None:
        report = report_from_predictions(balanced, [s.label for s in balanced], provenance=Provenance(seed=1))
        payload = report.to_payload()

        assert payload["accuracy"] == 1.0
        assert payload["total"] == 15
        assert payload["per_quantifier"]["most"] == 1.0
        assert payload["provenance"]["seed"] == 1
        assert len(payload["ratio_bins"]) == 1 + 4 + 4 + 4 + 1


class TestRatioBins:
    def test_single_ratio(self) -> None:
        samples = [make(10, 5, identifier=i) for i in range(4)]
        bins = [b for b in ratio_bins_from_predictions(samples, [L.some] * 4) if b.support]

        assert len(bins) == 1
        assert (bins[0].label, bins[0].support, bins[0].accuracy) == (L.some, 4, 1.0)

    def test_empty_bins(self) -> None:
        bins = ratio_bins_from_predictions([make(10, 5)], [L.few])
        few = [b for b in bins if b.label is L.few]

        assert [b.accuracy for b in few] == [None] * 4
        assert [b.index for b in few] == [0, 1, 2, 3]
        assert few[0].low == 0 and few[-1].high == Fraction(17, 100)

    def test_edges_of_extremes(self) -> None:
        bins = ratio_bins_from_predictions([make(7, 0), make(7, 7)], [L.no, L.most])
        extremes = {b.label: b for b in bins if b.label in (L.no, L.all)}

        assert extremes[L.no].accuracy == 1.0
        assert extremes[L.all].accuracy == 0.0
        assert extremes[L.all].low == extremes[L.all].high == 1

    def test_upper_edge_goes_to_last_bin(self) -> None:
        bins = ratio_bins_from_predictions([make(6, 1)], [L.few])

        assert [b.support for b in bins if b.label is L.few] == [0, 0, 0, 1]

    def test_no_bins(self) -> None:
        with pytest.raises(ConfigError):
            ratio_bins_from_predictions([], [], bins=0)

    def test_boundary_dips(self) -> None:
        samples = [make(6, 1), make(9, 1), make(16, 3), make(10, 5), make(10, 6), make(10, 7), make(10, 9)]
        predictions = [L.some, L.few, L.few, L.some, L.some, L.some, L.most]
        dips = boundary_dips(ratio_bins_from_predictions(samples, predictions))

        assert dips == {L.few: True, L.some: True, L.most: True}

    def test_no_dip(self) -> None:
        samples = [make(6, 1), make(9, 1)]
        dips = boundary_dips(ratio_bins_from_predictions(samples, [L.few, L.some]))

        assert dips[L.few] is False
        assert dips[L.most] is None
        assert boundary_dips(ratio_bins_from_predictions(samples, [L.few, L.few], bins=2))[L.few] is None

    def test_interior_pools_the_middle_bins(self) -> None:
        samples = [make(16, 1), make(14, 1), make(12, 1), make(9, 1), make(6, 1), make(7, 1)]
        predictions = [L.few, L.few, L.few, L.some, L.few, L.some]
        bins = ratio_bins_from_predictions(samples, predictions)

        assert [b.support for b in bins if b.label is L.few] == [0, 3, 1, 2]
        assert boundary_dips(bins)[L.few] is True
        assert boundary_dips(ratio_bins_from_predictions(samples, predictions, bins=3))[L.few] is not None


class TestSpansAndDistractors:
    def test_span_order(self) -> None:
        samples = [make(10, 9), make(8, 0), make(6, 3), make(12, 6)]
        points = ratio_span_analysis(samples, [L.most, L.no, L.few, L.some])

        assert [p.ratio for p in points] == [0, Fraction(1, 2), Fraction(9, 10)]
        assert [(p.support, p.correct) for p in points] == [(1, 1), (2, 1), (1, 1)]

    def test_distractor_rows(self) -> None:
        samples = [make(6, 0, 0), make(6, 0, 3), make(7, 7, 3), make(8, 4, 0)]
        rows = distractor_table(samples, [L.no, L.few, L.all, L.some])

        assert [r.cardinality for r in rows] == [0, 1, 2, 3]
        assert [r.support for r in rows] == [2, 0, 0, 2]
        assert sum(r.support for r in rows) == len(samples)
        assert [r.accuracy for r in rows] == [1.0, None, None, 0.5]
        assert distractor_table([], []) == []


class TestEvaluate:
    def test_zero_model(self, corpus: Corpus, tmp_path: Path) -> None:
        spec = ModelSpec(
            Architecture.BOW, vocabulary=corpus.catalog.vocabulary_size, d_visual=corpus.config.dim, slots=8
        )
        model = build_model(spec)
        model.load_state_dict({name: np.zeros_like(v) for name, v in model.state_dict().items()})
        samples = corpus.samples()

        report = evaluate(model, samples, provenance=Provenance(command="eval"))

        assert report.accuracy == pytest.approx(0.2)
        assert report.confusion[:, 0].sum() == len(samples)
        assert report.to_payload() == evaluate(model, samples, provenance=Provenance(command="eval")).to_payload()

        path = write_report(report.to_payload(), tmp_path / "report.json")
        assert read_json(path)["accuracy"] == report.accuracy

    def test_compare(self, balanced: list[Sample]) -> None:
        perfect = report_from_predictions(balanced, [s.label for s in balanced])
        constant = report_from_predictions(balanced, [L.some] * len(balanced))
        table = compare_reports({"qsan": perfect, "bow": constant})

        assert table["models"] == ["qsan", "bow"]
        assert table["accuracy"] == {"qsan": 1.0, "bow": pytest.approx(0.2)}
        assert table["per_quantifier"]["some"] == {"qsan": 1.0, "bow": 1.0}
        assert table["per_quantifier"]["all"] == {"qsan": 1.0, "bow": 0.0}


def test_plot_data(tmp_path: Path) -> None:
    path = write_plot_data({"loss": [(1, 0.5), (2, None)], "acc": [(0.25, 1.0)]}, tmp_path / "plot.tsv")

    assert path.read_text().splitlines() == ["series\tx\ty", "loss\t1.0\t0.5", "loss\t2.0\t", "acc\t0.25\t1.0"]
