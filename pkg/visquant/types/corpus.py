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
from typing import Any, Literal, TypedDict

from typing_extensions import NotRequired


class CatalogPayload(TypedDict):
    objects: list[str]
    properties: list[str]
    plausible: list[list[int]]
    unigram: list[int]
    cooccurrence: list[list[int]]
    corpus_size: int


class DatapointRecord(TypedDict):
    id: int
    scenario: int
    restrictor: int
    scope: int
    label: str
    m: int
    k: int
    distractors_with_scope: int
    objects: list[int]
    properties: list[list[int]]
    row: int
    restrictor_row: int
    scope_row: int


class CorpusMeta(TypedDict):
    kind: Literal["scenes", "dots"]
    format: int
    count: int
    seed: int
    config: dict[str, Any]
    provenance: dict[str, Any]
    dim: NotRequired[int]
    slots: NotRequired[int]
    word_rows: NotRequired[int]


class ManifestHeader(TypedDict):
    corpus: str
    partition: str
    setting: str
    fractions: list[float]
    seed: int
    exclude_heldout_distractors: bool
    heldout: list[Any]
    provenance: dict[str, Any]
