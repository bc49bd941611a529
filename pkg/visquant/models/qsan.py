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

from ..enums import Architecture
from ..samples import Sample
from ..tensor import Node, concat, row_cosine, scale, scale_rows, stack, sub
from .base import Model, ModelSpec, register
from .layers import Attention, Linear
from .qmn import Gists
from .san import attend

__all__ = ("QuantificationAttention",)


MATCH_INIT: float = 8.0
AGREEMENT_SCALE: float = 5.0
AGREEMENT_FEATURES: int = 5


@register(Architecture.QSAN)
class QuantificationAttention(Model):
    """The quantification stacked attention network.

    A restrictor attention module, queried with the restrictor word vector, yields the restrictor gist and its final
    attention weights ``p``. The slots reweighted as ``p_i v_i`` feed a scope attention module queried with the
    scope word vector. The two gists are concatenated with their agreement features and classified.

    Every attention pass adds ``match * cos(v_i, q)`` to its scores, with ``match`` learned and starting at
    :data:`MATCH_INIT`, so slots are picked by their similarity to the query word from the first epoch.
    The agreement features are the cosines of the summed restrictor attention outputs and of the summed scope
    attention outputs with the scope word and with the restrictor word, and the cosine of the two words, all scaled
    by :data:`AGREEMENT_SCALE`. Their first entry tracks the share of restrictor slots that carry the scope.
    """

    def __init__(self, spec: ModelSpec) -> None:
        super().__init__(spec)
        self.restrictor: list[Attention] = [
            Attention(self, f"restrictor{i + 1}", spec.d_visual, spec.d_hidden, matching=MATCH_INIT)
            for i in range(spec.stacks)
        ]
        self.scope: list[Attention] = [
            Attention(self, f"scope{i + 1}", spec.d_visual, spec.d_hidden, matching=MATCH_INIT)
            for i in range(spec.stacks)
        ]
        self.classifier = Linear(self, "classifier", 2 * spec.d_visual + AGREEMENT_FEATURES, 5)

    def expected_parameter_count(self) -> int:
        s = self.spec
        return 2 * s.stacks * Attention.count(s.d_visual, s.d_hidden, matching=True) + Linear.count(
            2 * s.d_visual + AGREEMENT_FEATURES, 5
        )

    def restrictor_pass(self, sample: Sample) -> tuple[Node, Node, Node]:
        """The restrictor gist, the restrictor attention weights and the reweighted slots."""
        restrictor, _ = self._words(sample)
        visual = Node.constant(self._scenario(sample))

        gist, weights = attend(self.restrictor, visual, restrictor)
        return gist, weights, scale_rows(visual, weights)

    def gists(self, sample: Sample) -> Gists:
        _, scope = self._words(sample)
        restrictor_gist, _, weighted = self.restrictor_pass(sample)

        scope_gist, _ = attend(self.scope, weighted, scope)
        return Gists(restrictor_gist, scope_gist)

    def agreement(self, sample: Sample, gists: Gists) -> Node:
        """The five scaled agreement features of ``gists`` with the query words."""
        restrictor, scope = self._words(sample)
        attended_restrictor = sub(gists.restrictor_gist, restrictor)
        attended_scope = sub(gists.scope_restrictor_gist, scope)

        features = concat(
            [
                row_cosine(stack([attended_restrictor, attended_scope, restrictor]), scope),
                row_cosine(stack([attended_restrictor, attended_scope]), restrictor),
            ]
        )
        return scale(features, AGREEMENT_SCALE)

    def forward(self, sample: Sample) -> Node:
        g = self.gists(sample)
        return self.classifier(concat([g.restrictor_gist, g.scope_restrictor_gist, self.agreement(sample, g)]))
