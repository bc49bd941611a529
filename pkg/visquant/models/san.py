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
from ..tensor import Node, add
from .base import Model, ModelSpec, register
from .layers import Attention, Linear, LSTMCell

__all__ = ("StackedAttention", "attend")


def attend(stack: list[Attention], visual: Node, linguistic: Node) -> tuple[Node, Node]:
    """Run the attention passes of ``stack``, adding each gist to the running query.

    Returns the final query representation and the attention weights of the last pass.
    """
    u: Node = linguistic
    weights: Node | None = None

    for layer in stack:
        gist, weights = layer(visual, u)
        u = add(u, gist)

    assert weights is not None
    return u, weights


@register(Architecture.SAN)
class StackedAttention(Model):
    """The stacked attention network.

    The query LSTM reads the restrictor and scope word vectors. Its hidden size is the slot dimension so that each
    gist can be added to the running query. ``stacks`` attention passes follow, then a linear classifier.
    """

    def __init__(self, spec: ModelSpec) -> None:
        super().__init__(spec)
        self.query = LSTMCell(self, "query", spec.d_visual, spec.d_visual)
        self.stack: list[Attention] = [
            Attention(self, f"stack{i + 1}", spec.d_visual, spec.d_hidden) for i in range(spec.stacks)
        ]
        self.classifier = Linear(self, "classifier", spec.d_visual, 5)

    def expected_parameter_count(self) -> int:
        s = self.spec
        return (
            LSTMCell.count(s.d_visual, s.d_visual)
            + s.stacks * Attention.count(s.d_visual, s.d_hidden)
            + Linear.count(s.d_visual, 5)
        )

    def forward(self, sample: Sample) -> Node:
        visual = Node.constant(self._scenario(sample))
        u, _ = attend(self.stack, visual, self.query.run(self._words(sample)))
        return self.classifier(u)
