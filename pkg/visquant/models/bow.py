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

import numpy as np

from ..enums import Architecture
from ..samples import Sample
from ..tensor import Node, concat
from .base import Model, ModelSpec, register
from .layers import Linear

__all__ = ("BagOfWords", "CNNBagOfWords")


class _WordFeature(Model):
    def __init__(self, spec: ModelSpec) -> None:
        super().__init__(spec)
        self.embed = Linear(self, "embed", spec.vocabulary, spec.d_embed)

    def query_vector(self, sample: Sample) -> Node:
        """The bag-of-words vector: one active unit for the restrictor word and one for the scope word."""
        bag = np.zeros(self.spec.vocabulary)
        bag[self._vocabulary_id(sample.restrictor)] += 1.0
        bag[self._vocabulary_id(sample.scope)] += 1.0
        return Node.constant(bag)

    def word_feature(self, sample: Sample) -> Node:
        return self.embed(self.query_vector(sample))


@register(Architecture.BOW)
class BagOfWords(_WordFeature):
    """The blind bag-of-words baseline. The query is embedded and mapped to five logits; the scenario is ignored."""

    def __init__(self, spec: ModelSpec) -> None:
        super().__init__(spec)
        self.classifier = Linear(self, "classifier", spec.d_embed, 5)

    def expected_parameter_count(self) -> int:
        s = self.spec
        return Linear.count(s.vocabulary, s.d_embed) + Linear.count(s.d_embed, 5)

    def forward(self, sample: Sample) -> Node:
        return self.classifier(self.word_feature(sample))


@register(Architecture.CNN_BOW)
class CNNBagOfWords(_WordFeature):
    """The bag-of-words word feature concatenated with every slot vector.

    Missing slots are filled with zero vectors. The concatenation follows corpus slot order, so this model is not
    invariant to slot permutations.
    """

    def __init__(self, spec: ModelSpec) -> None:
        super().__init__(spec)
        self.classifier = Linear(self, "classifier", spec.d_embed + spec.slots * spec.d_visual, 5)

    def expected_parameter_count(self) -> int:
        s = self.spec
        return Linear.count(s.vocabulary, s.d_embed) + Linear.count(s.d_embed + s.slots * s.d_visual, 5)

    def image_feature(self, sample: Sample) -> Node:
        visual = self._scenario(sample)
        padded = np.zeros((self.spec.slots, self.spec.d_visual))
        padded[: visual.shape[0]] = visual
        return Node.constant(padded.reshape(-1))

    def forward(self, sample: Sample) -> Node:
        return self.classifier(concat([self.word_feature(sample), self.image_feature(sample)]))
