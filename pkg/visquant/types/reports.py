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
from typing import Any, TypedDict

from typing_extensions import NotRequired


class QueryBiasPayload(TypedDict):
    restrictor: int
    scope: int
    occurrences: int
    ratios: dict[str, float]


class RatioSummaryPayload(TypedDict):
    mean: float
    min: float
    max: float


class BoxPayload(TypedDict):
    min: float
    q1: float
    median: float
    q3: float
    max: float


class BiasReportPayload(TypedDict):
    queries: list[QueryBiasPayload]
    summary: dict[str, RatioSummaryPayload]
    boxplot: dict[str, BoxPayload]
    max_ratio: float
    provenance: NotRequired[dict[str, Any]]


class CorpusDescriptionPayload(TypedDict):
    objects: int
    properties: int
    queries: int
    datapoints: int
    mean_plausible_properties: float
    mean_restrictor_cardinality: float
    mean_slots: float
    mean_distractors_with_scope: float


class RatioBinPayload(TypedDict):
    label: str
    index: int
    low: float
    high: float
    support: int
    correct: int
    accuracy: float | None


class SpanPointPayload(TypedDict):
    ratio: float
    numerator: int
    denominator: int
    support: int
    correct: int
    accuracy: float


class DistractorRowPayload(TypedDict):
    cardinality: int
    support: int
    correct: int
    accuracy: float | None


class EvalReportPayload(TypedDict):
    total: int
    accuracy: float
    per_quantifier: dict[str, float | None]
    support: dict[str, int]
    confusion: list[list[int]]
    adjacency: list[int]
    ratio_bins: list[RatioBinPayload]
    boundary_dips: dict[str, bool | None]
    distractors: list[DistractorRowPayload]
    provenance: NotRequired[dict[str, Any]]


class EpochPayload(TypedDict):
    epoch: int
    loss: float
    train_accuracy: float
    val_accuracy: float


class HistoryPayload(TypedDict):
    epochs: list[EpochPayload]
    best_epoch: int
    best_val_accuracy: float
    stopped_early: bool
