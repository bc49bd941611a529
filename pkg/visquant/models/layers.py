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

from collections.abc import Sequence
from typing import TYPE_CHECKING

import numpy as np

from ..tensor import Node, add, add_rowwise, concat, matmul, mul, row_cosine, sigmoid, slice_, softmax, tanh

if TYPE_CHECKING:
    from .base import Model


__all__ = ("Linear", "LSTMCell", "Attention", "attention_layer")


class Linear:
    """``x W + b`` for a vector, or for every row of a matrix."""

    def __init__(self, model: Model, name: str, fan_in: int, fan_out: int, *, bias: bool = True) -> None:
        self.fan_in = fan_in
        self.fan_out = fan_out
        self.weight: Node = model.parameter(f"{name}.weight", (fan_in, fan_out), fan_in=fan_in, fan_out=fan_out)
        self.bias: Node | None = model.parameter(f"{name}.bias", (fan_out,)) if bias else None

    @staticmethod
    def count(fan_in: int, fan_out: int, *, bias: bool = True) -> int:
        return fan_in * fan_out + (fan_out if bias else 0)

    def __call__(self, x: Node) -> Node:
        out: Node = matmul(x, self.weight)

        if self.bias is None:
            return out

        return add_rowwise(out, self.bias) if out.value.ndim == 2 else add(out, self.bias)


class LSTMCell:
    """A standard LSTM cell with input, forget and output gates.

    The gate pre-activations are computed with one ``(input + hidden) x 4 hidden`` matrix, split in the order
    input, forget, output, candidate.
    """

    def __init__(self, model: Model, name: str, input_size: int, hidden_size: int) -> None:
        self.input_size = input_size
        self.hidden_size = hidden_size
        self.gates = Linear(model, name, input_size + hidden_size, 4 * hidden_size)

    @staticmethod
    def count(input_size: int, hidden_size: int) -> int:
        return Linear.count(input_size + hidden_size, 4 * hidden_size)

    def step(self, x: Node, hidden: Node, cell: Node) -> tuple[Node, Node]:
        h: int = self.hidden_size
        z: Node = self.gates(concat([x, hidden]))

        input_gate = sigmoid(slice_(z, 0, h))
        forget_gate = sigmoid(slice_(z, h, 2 * h))
        output_gate = sigmoid(slice_(z, 2 * h, 3 * h))
        candidate = tanh(slice_(z, 3 * h, 4 * h))

        cell = add(mul(forget_gate, cell), mul(input_gate, candidate))
        return mul(output_gate, tanh(cell)), cell

    def run(self, inputs: Sequence[Node]) -> Node:
        """Feed ``inputs`` in order from zero state and return the last hidden state."""
        hidden = Node.constant(np.zeros(self.hidden_size))
        cell = Node.constant(np.zeros(self.hidden_size))

        for x in inputs:
            hidden, cell = self.step(x, hidden, cell)

        return hidden


def attention_layer(
    visual: Node,
    linguistic: Node,
    image_weight: Node,
    query_weight: Node,
    bias: Node,
    score: Node,
    match: Node | None = None,
) -> tuple[Node, Node]:
    """One attention pass of a stacked attention network.

    ``h_i = tanh(W_v v_i + W_q q + b)``, ``p = softmax(w . h_i)`` and the gist is ``sum_i p_i v_i``. With ``match``
    the score of slot ``i`` also receives ``match * cos(v_i, q)``.

    Parameters
    ----------
    visual: :class:`~visquant.Node`
        The ``S x d`` slot vectors.
    linguistic: :class:`~visquant.Node`
        The ``d`` query representation.
    image_weight: :class:`~visquant.Node`
        ``W_v``, shape ``d x a``.
    query_weight: :class:`~visquant.Node`
        ``W_q``, shape ``d x a``.
    bias: :class:`~visquant.Node`
        ``b``, shape ``a``.
    score: :class:`~visquant.Node`
        ``w``, shape ``a``.
    match: :class:`~visquant.Node` | None
        Scalar weight of the slot-query cosine. ``None`` leaves the scores purely additive.

    Returns
    -------
    tuple[:class:`~visquant.Node`, :class:`~visquant.Node`]
        The ``d`` gist and the ``S`` attention weights.
    """
    hidden: Node = tanh(add_rowwise(matmul(visual, image_weight), add(matmul(linguistic, query_weight), bias)))
    scores: Node = matmul(hidden, score)

    if match is not None:
        scores = add(scores, mul(row_cosine(visual, linguistic), match))

    weights: Node = softmax(scores)
    return matmul(weights, visual), weights


class Attention:
    """The parameters of one attention pass.

    ``matching`` adds a scalar cosine weight ``.match`` initialized to that value.
    """

    def __init__(self, model: Model, name: str, dim: int, hidden: int, *, matching: float | None = None) -> None:
        self.image = model.parameter(f"{name}.image", (dim, hidden), fan_in=dim, fan_out=hidden)
        self.query = model.parameter(f"{name}.query", (dim, hidden), fan_in=dim, fan_out=hidden)
        self.bias = model.parameter(f"{name}.bias", (hidden,))
        self.score = model.parameter(f"{name}.score", (hidden,), fan_in=hidden, fan_out=1)
        self.match: Node | None = None if matching is None else model.parameter(f"{name}.match", (), fill=matching)

    @staticmethod
    def count(dim: int, hidden: int, *, matching: bool = False) -> int:
        return 2 * dim * hidden + 2 * hidden + int(matching)

    def __call__(self, visual: Node, linguistic: Node) -> tuple[Node, Node]:
        return attention_layer(visual, linguistic, self.image, self.query, self.bias, self.score, self.match)
