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

from ..enums import Architecture
from ..samples import Sample
from ..tensor import Node, concat, reduce_sum, row_cosine, scale_rows, softmax
from .base import Model, ModelSpec, register
from .layers import Linear

__all__ = ("Gists", "QuantificationMemory", "memory_gists")


@dataclass(frozen=True)
class Gists:
    """The two summaries a quantification model classifies.

    Attributes
    ----------
    restrictor_gist: :class:`~visquant.Node`
        The scenario weighted by its similarity to the restrictor.
    scope_restrictor_gist: :class:`~visquant.Node`
        The restrictor-weighted scenario weighted again by its similarity to the scope.
    """

    restrictor_gist: Node
    scope_restrictor_gist: Node


def memory_gists(memory: Node, restrictor: Node, scope: Node, *, softmax_s2: bool = False) -> Gists:
    """Compute both gists over the memory cells.

    ``S1_i = cos(V_i, r)`` and ``W1_i = S1_i V_i``; the restrictor gist is ``sum_i W1_i``. Then
    ``S2_i = cos(W1_i, s)`` and ``W2_i = S2_i W1_i``; the scope gist is ``sum_i W2_i``. With ``softmax_s2`` the scope
    similarities are normalized with a softmax first.

    Slots with negative similarity to the restrictor enter the restrictor gist with a negative weight.
    """
    first: Node = scale_rows(memory, row_cosine(memory, restrictor))
    similarity: Node = row_cosine(first, scope)

    if softmax_s2:
        similarity = softmax(similarity)

    second: Node = scale_rows(first, similarity)
    return Gists(reduce_sum(first, axis=0), reduce_sum(second, axis=0))


@register(Architecture.QMN)
class QuantificationMemory(Model):
    """The quantification memory network.

    Slot vectors and the two word vectors are mapped linearly to ``d_mem``. The gists of :func:`memory_gists` are
    concatenated and classified.
    """

    def __init__(self, spec: ModelSpec) -> None:
        super().__init__(spec)
        self.visual = Linear(self, "memory", spec.d_visual, spec.d_mem, bias=False)
        self.words = Linear(self, "words", spec.d_visual, spec.d_mem, bias=False)
        self.classifier = Linear(self, "classifier", 2 * spec.d_mem, 5)

    def expected_parameter_count(self) -> int:
        s = self.spec
        return 2 * Linear.count(s.d_visual, s.d_mem, bias=False) + Linear.count(2 * s.d_mem, 5)

    def gists(self, sample: Sample) -> Gists:
        restrictor, scope = self._words(sample)
        memory: Node = self.visual(Node.constant(self._scenario(sample)))

        return memory_gists(memory, self.words(restrictor), self.words(scope), softmax_s2=self.spec.qmn_softmax_s2)

    def forward(self, sample: Sample) -> Node:
        g = self.gists(sample)
        return self.classifier(concat([g.restrictor_gist, g.scope_restrictor_gist]))
