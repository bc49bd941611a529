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
from collections import Counter, defaultdict
from collections.abc import Iterable
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .enums import QuantifierLabel
from .exceptions import ConfigError
from .utils import Provenance

if TYPE_CHECKING:
    from .scenarios import Corpus, Datapoint
    from .types.reports import BiasReportPayload, BoxPayload, CorpusDescriptionPayload, RatioSummaryPayload


__all__ = ("QueryBias", "BiasReport", "audit_bias", "describe_corpus")


logger: logging.Logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QueryBias:
    """How often one query is answered with each quantifier.

    Attributes
    ----------
    query: tuple[int, int]
        The ``(object, property)`` ids.
    occurrences: int
        The number of datapoints asking this query.
    ratios: tuple[float, ...]
        Share of those datapoints per label, indexed by label ordinal. Sums to one.
    """

    query: tuple[int, int]
    occurrences: int
    ratios: tuple[float, ...]

    def ratio(self, label: QuantifierLabel) -> float:
        return self.ratios[int(label)]


class BiasReport:
    """The language-bias audit of a corpus.

    A blind model can only beat chance when queries are skewed toward some quantifier. An unbiased corpus has every
    per-label ratio close to ``0.2``.

    Attributes
    ----------
    queries: list[:class:`QueryBias`]
        One entry per distinct query, ordered by ``(object, property)``.
    provenance: :class:`~visquant.Provenance` | None
        How the audited corpus was produced.
    """

    def __init__(self, queries: list[QueryBias], *, provenance: Provenance | None = None) -> None:
        self.queries = queries
        self.provenance = provenance

    def __repr__(self) -> str:
        return f"BiasReport(queries={len(self.queries)}, max_ratio={self.max_ratio:.3f})"

    def column(self, label: QuantifierLabel) -> np.ndarray:
        return np.array([q.ratio(label) for q in self.queries])

    @property
    def max_ratio(self) -> float:
        return max(max(q.ratios) for q in self.queries)

    def summary(self) -> dict[QuantifierLabel, tuple[float, float, float]]:
        """Mean, min and max ratio of every label across queries."""
        out: dict[QuantifierLabel, tuple[float, float, float]] = {}

        for label in QuantifierLabel:
            values = self.column(label)
            out[label] = (float(values.mean()), float(values.min()), float(values.max()))

        return out

    def boxplot(self) -> dict[QuantifierLabel, tuple[float, float, float, float, float]]:
        """Five-number summary of every label's ratio distribution: min, first quartile, median, third quartile, max."""
        out: dict[QuantifierLabel, tuple[float, float, float, float, float]] = {}

        for label in QuantifierLabel:
            values = np.percentile(self.column(label), [0, 25, 50, 75, 100])
            out[label] = tuple(float(v) for v in values)  # type: ignore

        return out

    def to_payload(self) -> BiasReportPayload:
        summary: dict[str, RatioSummaryPayload] = {
            label.word: {"mean": mean, "min": low, "max": high} for label, (mean, low, high) in self.summary().items()
        }
        boxes: dict[str, BoxPayload] = {
            label.word: {"min": b[0], "q1": b[1], "median": b[2], "q3": b[3], "max": b[4]}
            for label, b in self.boxplot().items()
        }

        payload: BiasReportPayload = {
            "queries": [
                {
                    "restrictor": q.query[0],
                    "scope": q.query[1],
                    "occurrences": q.occurrences,
                    "ratios": {label.word: q.ratio(label) for label in QuantifierLabel},
                }
                for q in self.queries
            ],
            "summary": summary,
            "boxplot": boxes,
            "max_ratio": self.max_ratio,
        }

        if self.provenance is not None:
            payload["provenance"] = dict(self.provenance)

        return payload

    def plot_series(self) -> dict[str, list[tuple[float, float]]]:
        """Per-label series of ``(query index, ratio)`` points for box plots."""
        return {
            label.word: [(float(i), q.ratio(label)) for i, q in enumerate(self.queries)] for label in QuantifierLabel
        }


def audit_bias(datapoints: Iterable[Datapoint], *, provenance: Provenance | None = None) -> BiasReport:
    """Measure the bias of each query toward each quantifier.

    For every distinct query the frequency of each label is divided by the frequency of the query.

    Parameters
    ----------
    datapoints: Iterable[:class:`~visquant.Datapoint`]
        The datapoints to audit, usually a whole :class:`~visquant.Corpus`.
    provenance: :class:`~visquant.Provenance` | None
        Attached to the report unchanged.

    Raises
    ------
    ConfigError
        No datapoints were given.
    """
    counts: defaultdict[tuple[int, int], Counter[QuantifierLabel]] = defaultdict(Counter)

    for d in datapoints:
        counts[d.query][d.label] += 1

    if not counts:
        raise ConfigError("Can not audit an empty corpus.")

    queries: list[QueryBias] = []
    for query in sorted(counts):
        labels = counts[query]
        total: int = sum(labels.values())
        queries.append(QueryBias(query, total, tuple(labels[label] / total for label in QuantifierLabel)))

    report = BiasReport(queries, provenance=provenance)
    logger.debug(f"Audited {len(queries)} queries: {report!r}")
    return report


def describe_corpus(corpus: Corpus) -> CorpusDescriptionPayload:
    """Descriptive statistics of a corpus: concept, query and datapoint counts and mean set sizes."""
    datapoints = list(corpus)
    n: int = max(len(datapoints), 1)

    return {
        "objects": len({d.restrictor for d in datapoints}),
        "properties": len({d.scope for d in datapoints}),
        "queries": len({d.query for d in datapoints}),
        "datapoints": len(datapoints),
        "mean_plausible_properties": float(np.mean([len(p) for p in corpus.catalog.plausible])),
        "mean_restrictor_cardinality": sum(d.counts.m for d in datapoints) / n,
        "mean_slots": sum(len(d.scenario) for d in datapoints) / n,
        "mean_distractors_with_scope": sum(d.distractors_with_scope for d in datapoints) / n,
    }
