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

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np
import numpy.typing as npt

from .enums import QuantifierLabel
from .exceptions import ConfigError
from .quantifiers import ratio_range, scale_distance
from .utils import Provenance, write_json

if TYPE_CHECKING:
    from .models import Model
    from .samples import Sample
    from .types.reports import DistractorRowPayload, EvalReportPayload, RatioBinPayload, SpanPointPayload


__all__ = (
    "RatioBin",
    "SpanPoint",
    "DistractorRow",
    "EvalReport",
    "predict",
    "evaluate",
    "report_from_predictions",
    "ratio_bin_analysis",
    "ratio_bins_from_predictions",
    "boundary_dips",
    "ratio_span_analysis",
    "distractor_analysis",
    "distractor_table",
    "compare_reports",
    "write_report",
    "write_plot_data",
)


logger: logging.Logger = logging.getLogger(__name__)


DEFAULT_BINS: int = 4


@dataclass(frozen=True)
class RatioBin:
    """Accuracy over the datapoints whose ratio ``k / m`` falls in one slice of a label's range.

    Attributes
    ----------
    label: :class:`~visquant.QuantifierLabel`
        The label whose range is binned.
    index: int
        Position of the bin within the range, from the low end.
    low: fractions.Fraction
        Lower edge of the bin.
    high: fractions.Fraction
        Upper edge of the bin.
    support: int
        Number of datapoints in the bin.
    correct: int
        Number of those predicted correctly.
    """

    label: QuantifierLabel
    index: int
    low: Fraction
    high: Fraction
    support: int
    correct: int

    @property
    def accuracy(self) -> float | None:
        """``None`` for an empty bin."""
        return self.correct / self.support if self.support else None

    def to_payload(self) -> RatioBinPayload:
        return {
            "label": self.label.word,
            "index": self.index,
            "low": float(self.low),
            "high": float(self.high),
            "support": self.support,
            "correct": self.correct,
            "accuracy": self.accuracy,
        }


@dataclass(frozen=True)
class SpanPoint:
    ratio: Fraction
    support: int
    correct: int

    @property
    def accuracy(self) -> float:
        return self.correct / self.support

    def to_payload(self) -> SpanPointPayload:
        return {
            "ratio": float(self.ratio),
            "numerator": self.ratio.numerator,
            "denominator": self.ratio.denominator,
            "support": self.support,
            "correct": self.correct,
            "accuracy": self.accuracy,
        }


@dataclass(frozen=True)
class DistractorRow:
    cardinality: int
    support: int
    correct: int

    @property
    def accuracy(self) -> float | None:
        return self.correct / self.support if self.support else None

    def to_payload(self) -> DistractorRowPayload:
        return {
            "cardinality": self.cardinality,
            "support": self.support,
            "correct": self.correct,
            "accuracy": self.accuracy,
        }


@dataclass(frozen=True)
class EvalReport:
    """Everything measured on one test set.

    Attributes
    ----------
    confusion: numpy.ndarray
        ``5 x 5`` counts; rows are true labels and columns predictions.
    ratio_bins: list[:class:`RatioBin`]
        Bins of every label, ordered by label then index.
    distractors: list[:class:`DistractorRow`]
        One row per number of distractors holding the scope property, from zero to the largest observed.
    provenance: :class:`~visquant.Provenance` | None
        How the model and test set were produced.
    """

    confusion: npt.NDArray[np.int64]
    ratio_bins: list[RatioBin]
    distractors: list[DistractorRow]
    provenance: Provenance | None = None

    @property
    def total(self) -> int:
        return int(self.confusion.sum())

    @property
    def correct(self) -> int:
        return int(np.trace(self.confusion))

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0

    @property
    def support(self) -> dict[QuantifierLabel, int]:
        return {label: int(self.confusion[int(label)].sum()) for label in QuantifierLabel}

    @property
    def per_quantifier(self) -> dict[QuantifierLabel, float | None]:
        """Accuracy per true label. ``None`` for labels absent from the test set."""
        out: dict[QuantifierLabel, float | None] = {}

        for label in QuantifierLabel:
            row = self.confusion[int(label)]
            out[label] = float(row[int(label)] / row.sum()) if row.sum() else None

        return out

    @property
    def adjacency(self) -> list[int]:
        """Number of predictions at each scale distance ``0..4`` from the true label."""
        out: list[int] = [0] * len(QuantifierLabel)

        for truth in QuantifierLabel:
            for guess in QuantifierLabel:
                out[scale_distance(truth, guess)] += int(self.confusion[int(truth), int(guess)])

        return out

    def to_payload(self) -> EvalReportPayload:
        payload: EvalReportPayload = {
            "total": self.total,
            "accuracy": self.accuracy,
            "per_quantifier": {label.word: value for label, value in self.per_quantifier.items()},
            "support": {label.word: value for label, value in self.support.items()},
            "confusion": self.confusion.tolist(),
            "adjacency": self.adjacency,
            "ratio_bins": [b.to_payload() for b in self.ratio_bins],
            "boundary_dips": {label.word: dip for label, dip in boundary_dips(self.ratio_bins).items()},
            "distractors": [r.to_payload() for r in self.distractors],
        }

        if self.provenance is not None:
            payload["provenance"] = dict(self.provenance)

        return payload

    def plot_series(self) -> dict[str, list[tuple[float, float]]]:
        series: dict[str, list[tuple[float, float]]] = {}

        for b in self.ratio_bins:
            if b.accuracy is not None:
                series.setdefault(f"ratio-{b.label.word}", []).append((float((b.low + b.high) / 2), b.accuracy))

        series["distractors"] = [(r.cardinality, r.accuracy) for r in self.distractors if r.accuracy is not None]
        return series


def predict(model: Model, samples: Sequence[Sample]) -> list[QuantifierLabel]:
    """Argmax of the logits of every sample. Ties are broken toward the lower ordinal."""
    return model.predict(samples)


def _confusion(samples: Sequence[Sample], predictions: Sequence[QuantifierLabel]) -> npt.NDArray[np.int64]:
    if len(samples) != len(predictions):
        raise ValueError(f"Got {len(predictions)} predictions for {len(samples)} samples.")

    matrix = np.zeros((len(QuantifierLabel), len(QuantifierLabel)), dtype=np.int64)
    for sample, guess in zip(samples, predictions):
        matrix[int(sample.label), int(guess)] += 1

    return matrix


def report_from_predictions(
    samples: Sequence[Sample],
    predictions: Sequence[QuantifierLabel],
    *,
    bins: int = DEFAULT_BINS,
    provenance: Provenance | None = None,
) -> EvalReport:
    return EvalReport(
        confusion=_confusion(samples, predictions),
        ratio_bins=ratio_bins_from_predictions(samples, predictions, bins=bins),
        distractors=distractor_table(samples, predictions),
        provenance=provenance,
    )


def evaluate(
    model: Model, samples: Sequence[Sample], *, bins: int = DEFAULT_BINS, provenance: Provenance | None = None
) -> EvalReport:
    """Predict every sample and aggregate the full report.

    Evaluation never changes ``model``; repeated calls give identical reports.
    """
    report = report_from_predictions(samples, predict(model, samples), bins=bins, provenance=provenance)
    logger.info(f"Evaluated {model!r} on {report.total} datapoints: accuracy {report.accuracy:.3f}")
    return report


def _bin_edges(label: QuantifierLabel, bins: int) -> list[tuple[Fraction, Fraction]]:
    r = ratio_range(label)

    if r.low == r.high:
        return [(r.low, r.high)]

    width: Fraction = (r.high - r.low) / bins
    return [(r.low + i * width, r.low + (i + 1) * width) for i in range(bins)]


def ratio_bins_from_predictions(
    samples: Sequence[Sample], predictions: Sequence[QuantifierLabel], *, bins: int = DEFAULT_BINS
) -> list[RatioBin]:
    """Bin datapoints by exact ratio within their label's range and count correct predictions per bin.

    The ranges of ``few``, ``some`` and ``most`` are cut into ``bins`` slices of equal width. ``no`` and ``all`` have a
    single bin at ratio 0 and 1. Empty bins are reported with ``None`` accuracy, never zero.

    Raises
    ------
    ConfigError
        ``bins`` is below one.
    """
    if bins < 1:
        raise ConfigError(f"At least one ratio bin is required, got {bins}.")

    support: dict[tuple[QuantifierLabel, int], list[int]] = {}

    for sample, guess in zip(samples, predictions):
        label = sample.label
        edges = _bin_edges(label, bins)
        index: int = 0

        if len(edges) > 1:
            low: Fraction = edges[0][0]
            width: Fraction = edges[0][1] - edges[0][0]
            index = min(int((sample.counts.ratio - low) / width), len(edges) - 1)

        counts = support.setdefault((label, index), [0, 0])
        counts[0] += 1
        counts[1] += guess is label

    out: list[RatioBin] = []
    for label in QuantifierLabel:
        for i, (low, high) in enumerate(_bin_edges(label, bins)):
            total, correct = support.get((label, i), (0, 0))
            out.append(RatioBin(label, i, low, high, total, correct))

            if not total and label in (QuantifierLabel.few, QuantifierLabel.some, QuantifierLabel.most):
                logger.warning(f"Ratio bin {i} of {label.word} ({float(low):.3f}-{float(high):.3f}) is empty.")

    return out


def ratio_bin_analysis(model: Model, samples: Sequence[Sample], bins: int = DEFAULT_BINS) -> list[RatioBin]:
    """Accuracy against the position of the ratio within each quantifier's range."""
    return ratio_bins_from_predictions(samples, predict(model, samples), bins=bins)


def boundary_dips(ratio_bins: Sequence[RatioBin]) -> dict[QuantifierLabel, bool | None]:
    """Whether the bin nearest a quantifier boundary is no more accurate than the range's interior bin.

    For ``few`` the boundary bin is the last, for ``most`` the first, for ``some`` the worse of both ends. The
    interior is the middle bin, or the two middle bins pooled when the count is even. ``None`` when a boundary bin or
    the whole interior is empty, or the label has fewer than three bins.
    """
    out: dict[QuantifierLabel, bool | None] = {}

    for label in (QuantifierLabel.few, QuantifierLabel.some, QuantifierLabel.most):
        row: list[RatioBin] = [b for b in ratio_bins if b.label is label]

        if len(row) < 3:
            out[label] = None
            continue

        if label is QuantifierLabel.few:
            edges = [row[-1]]
        elif label is QuantifierLabel.most:
            edges = [row[0]]
        else:
            edges = [row[0], row[-1]]

        middle: list[RatioBin] = row[(len(row) - 1) // 2 : len(row) // 2 + 1]
        support: int = sum(b.support for b in middle)
        interior: float | None = sum(b.correct for b in middle) / support if support else None
        edge_values = [b.accuracy for b in edges]

        if interior is None or any(v is None for v in edge_values):
            out[label] = None
        else:
            out[label] = min(v for v in edge_values if v is not None) <= interior

    return out


def ratio_span_analysis(samples: Sequence[Sample], predictions: Sequence[QuantifierLabel]) -> list[SpanPoint]:
    """Accuracy per distinct exact ratio over the whole span from 0 to 1, ordered by ratio."""
    table: dict[Fraction, list[int]] = {}

    for sample, guess in zip(samples, predictions):
        counts = table.setdefault(sample.counts.ratio, [0, 0])
        counts[0] += 1
        counts[1] += guess is sample.label

    return [SpanPoint(ratio, total, correct) for ratio, (total, correct) in sorted(table.items())]


def distractor_table(samples: Sequence[Sample], predictions: Sequence[QuantifierLabel]) -> list[DistractorRow]:
    """Accuracy per number of distractors holding the scope property.

    Rows run from zero to the largest observed cardinality without gaps; row supports sum to the number of samples.
    """
    if not samples:
        return []

    largest: int = max(s.distractors_with_scope for s in samples)
    totals = np.zeros(largest + 1, dtype=np.int64)
    hits = np.zeros(largest + 1, dtype=np.int64)

    for sample, guess in zip(samples, predictions):
        totals[sample.distractors_with_scope] += 1
        hits[sample.distractors_with_scope] += guess is sample.label

    return [DistractorRow(i, int(totals[i]), int(hits[i])) for i in range(largest + 1)]


def distractor_analysis(model: Model, samples: Sequence[Sample]) -> list[DistractorRow]:
    return distractor_table(samples, predict(model, samples))


def compare_reports(reports: Mapping[str, EvalReport]) -> dict[str, Any]:
    """Side-by-side accuracy per quantifier for several models.

    Returns a mapping with the model names in the given order, overall accuracy per model and, per label, the
    accuracy of every model.
    """
    names: list[str] = list(reports)

    return {
        "models": names,
        "accuracy": {name: reports[name].accuracy for name in names},
        "per_quantifier": {
            label.word: {name: reports[name].per_quantifier[label] for name in names} for label in QuantifierLabel
        },
    }


def write_report(payload: Mapping[str, Any], path: str | Path) -> Path:
    """Write a report payload as deterministic JSON."""
    target = write_json(path, dict(payload))
    logger.info(f"Wrote report {target}")
    return target


def write_plot_data(series: Mapping[str, Sequence[tuple[float, float | None]]], path: str | Path) -> Path:
    """Write x/y series as tab-separated ``series  x  y`` rows with a header line."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)

    lines: list[str] = ["series\tx\ty"]
    for name, points in series.items():
        lines.extend(f"{name}\t{float(x)!r}\t{'' if y is None else repr(float(y))}" for x, y in points)

    target.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return target
