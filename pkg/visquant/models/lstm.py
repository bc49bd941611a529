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
from ..tensor import Node, concat
from .base import Model, ModelSpec, register
from .layers import Linear, LSTMCell

__all__ = ("BlindLSTM", "CNNLSTM")


@register(Architecture.LSTM)
class BlindLSTM(Model):
    """A two-step LSTM over the restrictor and scope word vectors, mapped to five logits."""

    def __init__(self, spec: ModelSpec) -> None:
        super().__init__(spec)
        self.query = LSTMCell(self, "query", spec.d_visual, spec.d_hidden)
        self.classifier = Linear(self, "classifier", spec.d_hidden, 5)

    def expected_parameter_count(self) -> int:
        s = self.spec
        return LSTMCell.count(s.d_visual, s.d_hidden) + Linear.count(s.d_hidden, 5)

    def forward(self, sample: Sample) -> Node:
        return self.classifier(self.query.run(self._words(sample)))


@register(Architecture.CNN_LSTM)
class CNNLSTM(Model):
    """A visual LSTM over the slots next to the blind query LSTM.

    The last visual state is the first gist, the last query state the second; their concatenation is classified.
    Slots are read in corpus order.
    """

    def __init__(self, spec: ModelSpec) -> None:
        super().__init__(spec)
        self.visual = LSTMCell(self, "visual", spec.d_visual, spec.d_hidden)
        self.query = LSTMCell(self, "query", spec.d_visual, spec.d_hidden)
        self.classifier = Linear(self, "classifier", 2 * spec.d_hidden, 5)

    def expected_parameter_count(self) -> int:
        s = self.spec
        return 2 * LSTMCell.count(s.d_visual, s.d_hidden) + Linear.count(2 * s.d_hidden, 5)

    def gists(self, sample: Sample) -> tuple[Node, Node]:
        visual = self._scenario(sample)
        first: Node = self.visual.run([Node.constant(row) for row in visual])
        second: Node = self.query.run(self._words(sample))
        return first, second

    def forward(self, sample: Sample) -> Node:
        return self.classifier(concat(list(self.gists(sample))))
