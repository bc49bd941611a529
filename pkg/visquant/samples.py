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

import numpy as np
import numpy.typing as npt

from .enums import QuantifierLabel
from .quantifiers import SetCounts

__all__ = ("Sample",)


@dataclass(frozen=True, eq=False)
class Sample:
    """A datapoint converted to model inputs.

    Scene corpora fill the vocabulary ids, the query vectors and ``visual``. Dot corpora fill ``image`` only.

    Attributes
    ----------
    identifier: int
        The datapoint id.
    label: :class:`~visquant.QuantifierLabel`
        The ground-truth quantifier.
    counts: :class:`~visquant.SetCounts`
        Restrictor and target cardinalities.
    distractors_with_scope: int
        Number of distractor slots holding the scope property.
    restrictor: int
        Vocabulary id of the restrictor word.
    scope: int
        Vocabulary id of the scope word.
    visual: numpy.ndarray | None
        ``S x d`` slot vectors in corpus order.
    restrictor_vector: numpy.ndarray | None
        Embedding of the restrictor word.
    scope_vector: numpy.ndarray | None
        Embedding of the scope word.
    image: numpy.ndarray | None
        ``H x W`` grayscale raster for dot corpora.
    """

    identifier: int
    label: QuantifierLabel
    counts: SetCounts
    distractors_with_scope: int = 0
    restrictor: int = -1
    scope: int = -1
    visual: npt.NDArray[np.float64] | None = None
    restrictor_vector: npt.NDArray[np.float64] | None = None
    scope_vector: npt.NDArray[np.float64] | None = None
    image: npt.NDArray[np.float64] | None = None
