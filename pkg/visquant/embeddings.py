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

import logging
import math
from collections.abc import Iterable

import numpy as np
import numpy.typing as npt

from .catalog import Catalog
from .exceptions import ConfigError

__all__ = ("EmbeddingTables", "synth_embeddings")


logger: logging.Logger = logging.getLogger(__name__)


class EmbeddingTables:
    """Fixed unit vectors for every object and property, and the sampler for slot instances.

    The same tables ground both modalities: a query word is represented by exactly the vector that shapes the
    instances it names.

    Attributes
    ----------
    objects: numpy.ndarray
        ``|objects| x d`` unit vectors.
    properties: numpy.ndarray
        ``|properties| x d`` unit vectors.
    sigma: float
        Standard deviation of the isotropic noise added to each instance before normalization.
    """

    def __init__(
        self, objects: npt.NDArray[np.float64], properties: npt.NDArray[np.float64], *, sigma: float
    ) -> None:
        self.objects = objects
        self.properties = properties
        self.sigma = sigma

    def __repr__(self) -> str:
        return f"EmbeddingTables(dim={self.dim}, objects={len(self.objects)}, properties={len(self.properties)})"

    @property
    def dim(self) -> int:
        return int(self.objects.shape[1])

    @property
    def words(self) -> npt.NDArray[np.float64]:
        """Object vectors followed by property vectors, indexed like the shared vocabulary."""
        return np.concatenate([self.objects, self.properties], axis=0)

    def instance(self, obj: int, properties: Iterable[int], rng: np.random.Generator) -> npt.NDArray[np.float64]:
        """Embed one slot: ``normalize(e_object + sum(e_property) + noise)``."""
        vector = self.objects[obj].copy()

        for prop in properties:
            vector += self.properties[prop]

        if self.sigma > 0:
            vector += rng.normal(scale=self.sigma, size=self.dim)

        norm: float = float(np.linalg.norm(vector))
        if norm == 0.0:
            # Measure-zero cancellation; fall back to the object direction.
            return self.objects[obj].copy()

        return vector / norm


def synth_embeddings(catalog: Catalog, dim: int, sigma: float, seed: int) -> EmbeddingTables:
    """Draw the embedding tables for ``catalog``.

    Every word gets a random unit direction. When ``dim`` is at least the vocabulary size the directions are made
    exactly orthonormal with a QR decomposition; otherwise they are only nearly orthogonal.

    Parameters
    ----------
    catalog: :class:`~visquant.Catalog`
        The catalog whose concepts need vectors.
    dim: int
        The embedding dimension. Must be at least ``4``.
    sigma: float
        Instance noise standard deviation.
    seed: int
        Seed for the table draw. Instance noise uses the generator passed to :meth:`EmbeddingTables.instance`.

    Raises
    ------
    ConfigError
        ``dim`` is below ``4`` or ``sigma`` is negative.
    """
    if dim < 4:
        raise ConfigError(f"Embedding dimension must be at least 4, got {dim}.")

    if sigma < 0:
        raise ConfigError(f"Noise sigma must be nonnegative, got {sigma}.")

    total: int = catalog.vocabulary_size

    # Typical largest |cosine| between `total` random directions.
    coherence: float = math.sqrt(4.0 * math.log(max(total, 2)) / dim)
    if coherence > 0.5:
        logger.warning(
            f"Embedding dimension {dim} is small for {total} quasi-orthogonal concept directions "
            f"(expected max coherence ~{coherence:.2f}). Concepts will overlap."
        )

    rng: np.random.Generator = np.random.default_rng(seed)
    table = rng.normal(size=(total, dim))

    if dim >= total:
        table = np.linalg.qr(table.T)[0].T.copy()
    else:
        table /= np.linalg.norm(table, axis=1, keepdims=True)

    n_objects: int = len(catalog.objects)
    return EmbeddingTables(table[:n_objects], table[n_objects:], sigma=sigma)
