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

from ..dots import BACKGROUND
from ..enums import Architecture
from ..exceptions import DimensionError
from ..samples import Sample
from ..tensor import Node, conv2d, mean_pool, tanh
from .base import Model, ModelSpec, register
from .layers import Linear

__all__ = ("DotCNN",)


@register(Architecture.DOT_CNN)
class DotCNN(Model):
    """A shallow classifier for dot images: one convolution layer, tanh, spatial average pooling and a linear map.

    Pixels are rescaled to ``[-1, 1]`` around the background level, so the gray background reads as zero.
    """

    def __init__(self, spec: ModelSpec) -> None:
        super().__init__(spec)
        r: int = spec.receptive_field

        self.kernels = self.parameter("conv.kernels", (spec.filters, r, r), fan_in=r * r, fan_out=spec.filters)
        self.bias = self.parameter("conv.bias", (spec.filters,))
        self.classifier = Linear(self, "classifier", spec.filters, 5)

    def expected_parameter_count(self) -> int:
        s = self.spec
        return s.filters * s.receptive_field**2 + s.filters + Linear.count(s.filters, 5)

    def features(self, sample: Sample) -> Node:
        """The pooled response of every filter."""
        image = sample.image
        expected: tuple[int, int] = (self.spec.image_height, self.spec.image_width)

        if image is None or image.shape != expected:
            raise DimensionError(op="forward", shapes=(() if image is None else image.shape, expected))

        scaled = Node.constant((image - BACKGROUND) / BACKGROUND)
        return mean_pool(tanh(conv2d(scaled, self.kernels, self.bias, self.spec.stride)))

    def forward(self, sample: Sample) -> Node:
        return self.classifier(self.features(sample))
