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

import json
import logging
import math
from collections.abc import Sequence
from functools import cached_property
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
import numpy.typing as npt

from .exceptions import ConfigError, GenerationError

if TYPE_CHECKING:
    from .types.corpus import CatalogPayload


__all__ = ("UNSEEN_PMI", "MIN_WEIGHT", "Catalog", "pmi", "distractor_weights")


logger: logging.Logger = logging.getLogger(__name__)


UNSEEN_PMI: float = 0.01
MIN_WEIGHT: float = 0.01


class Catalog:
    """The concepts a corpus is built from: objects, properties, which pairs may co-occur and caption statistics.

    .. container:: operations

        .. describe:: repr(catalog)

            The official string representation of this Catalog.

    Parameters
    ----------
    objects: Sequence[str]
        The object names. The position of a name is the object id.
    properties: Sequence[str]
        The property names. The position of a name is the property id.
    plausible: Sequence[Sequence[int]]
        For every object, the ids of the properties it may be seen with.
    unigram: numpy.ndarray
        Caption frequency ``f(o)`` of every object.
    cooccurrence: numpy.ndarray
        Symmetric matrix of caption co-occurrence counts ``f(o1, o2)``.
    corpus_size: int
        The number of words ``N`` in the caption corpus.

    Raises
    ------
    ConfigError
        The statistics are inconsistent or an object has no plausible property.
    """

    def __init__(
        self,
        *,
        objects: Sequence[str],
        properties: Sequence[str],
        plausible: Sequence[Sequence[int]],
        unigram: npt.ArrayLike,
        cooccurrence: npt.ArrayLike,
        corpus_size: int,
    ) -> None:
        self.objects: tuple[str, ...] = tuple(objects)
        self.properties: tuple[str, ...] = tuple(properties)
        self.plausible: tuple[tuple[int, ...], ...] = tuple(tuple(sorted(set(p))) for p in plausible)
        self.unigram: npt.NDArray[np.int64] = np.asarray(unigram, dtype=np.int64)
        self.cooccurrence: npt.NDArray[np.int64] = np.asarray(cooccurrence, dtype=np.int64)
        self.corpus_size: int = int(corpus_size)

        n: int = len(self.objects)

        if len(self.plausible) != n or self.unigram.shape != (n,) or self.cooccurrence.shape != (n, n):
            raise ConfigError("Catalog statistics do not match the number of objects.")

        if any(not p for p in self.plausible):
            raise ConfigError("Every object requires at least one plausible property.")

        if any(q < 0 or q >= len(self.properties) for p in self.plausible for q in p):
            raise ConfigError("Plausible property id out of range.")

        if (self.unigram < 0).any() or (self.cooccurrence < 0).any():
            raise ConfigError("Catalog counts must be nonnegative.")

        if self.corpus_size < int(self.unigram.sum()):
            raise ConfigError(f"Corpus size {self.corpus_size} is smaller than the total object frequency.")

    def __repr__(self) -> str:
        return f"Catalog(objects={len(self.objects)}, properties={len(self.properties)}, queries={len(self.queries)})"

    @property
    def vocabulary_size(self) -> int:
        """Objects and properties share one vocabulary: objects first, then properties."""
        return len(self.objects) + len(self.properties)

    @cached_property
    def queries(self) -> list[tuple[int, int]]:
        """Every plausible ``(object, property)`` pair, in id order."""
        return [(o, p) for o, props in enumerate(self.plausible) for p in props]

    def is_plausible(self, obj: int, prop: int) -> bool:
        return prop in self.plausible[obj]

    @cached_property
    def pmi_matrix(self) -> npt.NDArray[np.float64]:
        n: int = len(self.objects)
        out: npt.NDArray[np.float64] = np.full((n, n), UNSEEN_PMI)

        f = self.unigram.astype(np.float64)
        joint = self.cooccurrence.astype(np.float64)
        seen = (joint > 0) & (f[:, None] > 0) & (f[None, :] > 0)

        with np.errstate(divide="ignore", invalid="ignore"):
            values = np.log(joint * self.corpus_size / (f[:, None] * f[None, :]))

        out[seen] = values[seen]
        return out

    @cached_property
    def _distractor_table(self) -> npt.NDArray[np.float64]:
        weights = np.maximum(self.pmi_matrix, MIN_WEIGHT)
        np.fill_diagonal(weights, 0.0)

        totals = weights.sum(axis=1, keepdims=True)
        return np.divide(weights, totals, out=np.zeros_like(weights), where=totals > 0)

    @classmethod
    def synthetic(
        cls,
        *,
        objects: int = 160,
        properties: int = 24,
        mean_plausible: float = 8.0,
        unseen_share: float = 0.05,
        topics: int = 8,
        seed: int = 0,
    ) -> Catalog:
        """Build a synthetic catalog with caption-like statistics.

        Objects draw a latent topic vector; pairs with similar topics co-occur more often than chance, which gives
        the PMI weights a realistic spread. A small share of objects never occurs in the captions at all, so every
        pair involving them is unseen.

        Parameters
        ----------
        objects: int
            Number of object concepts. Defaults to ``160``.
        properties: int
            Number of property concepts. Defaults to ``24``.
        mean_plausible: float
            Mean number of plausible properties per object. Every object gets at least two so that restrictor sets
            can always mix members with and without the scope property.
        unseen_share: float
            Expected share of objects with zero caption frequency.
        topics: int
            Dimension of the latent topic space.
        seed: int
            Seed for every random draw.
        """
        if objects < 2 or properties < 2:
            raise ConfigError("A catalog needs at least two objects and two properties.")

        rng: np.random.Generator = np.random.default_rng(seed)

        object_names: list[str] = [f"object{i:03d}" for i in range(objects)]
        property_names: list[str] = [f"property{i:02d}" for i in range(properties)]

        plausible: list[list[int]] = []
        for _ in range(objects):
            size: int = int(np.clip(rng.poisson(mean_plausible), 2, properties))
            plausible.append(sorted(rng.choice(properties, size=size, replace=False).tolist()))

        latent = rng.normal(size=(objects, topics))
        latent /= np.linalg.norm(latent, axis=1, keepdims=True)

        unigram = rng.integers(200, 5000, size=objects)
        unigram[rng.random(objects) < unseen_share] = 0
        corpus_size: int = max(1_000_000, int(unigram.sum()))

        affinity = latent @ latent.T
        expected = np.outer(unigram, unigram) / corpus_size * np.exp(3.0 * affinity)
        draws = np.triu(rng.poisson(expected), k=1)
        cooccurrence = draws + draws.T

        catalog: Catalog = cls(
            objects=object_names,
            properties=property_names,
            plausible=plausible,
            unigram=unigram,
            cooccurrence=cooccurrence,
            corpus_size=corpus_size,
        )

        logger.debug(f"Built synthetic {catalog!r} with seed {seed}")
        return catalog

    def to_payload(self) -> CatalogPayload:
        return {
            "objects": list(self.objects),
            "properties": list(self.properties),
            "plausible": [list(p) for p in self.plausible],
            "unigram": self.unigram.tolist(),
            "cooccurrence": self.cooccurrence.tolist(),
            "corpus_size": self.corpus_size,
        }

    @classmethod
    def from_payload(cls, data: CatalogPayload) -> Catalog:
        return cls(
            objects=data["objects"],
            properties=data["properties"],
            plausible=data["plausible"],
            unigram=data["unigram"],
            cooccurrence=data["cooccurrence"],
            corpus_size=data["corpus_size"],
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_payload(), sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> Catalog:
        data: CatalogPayload = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls.from_payload(data)


def pmi(o1: int, o2: int, catalog: Catalog) -> float:
    """Pointwise mutual information ``log(f(o1, o2) * N / (f(o1) * f(o2)))`` with the natural log.

    Pairs that never co-occur, or involve an object absent from the captions, get the constant ``0.01``.
    """
    f1, f2 = int(catalog.unigram[o1]), int(catalog.unigram[o2])
    joint: int = int(catalog.cooccurrence[o1, o2])

    if joint == 0 or f1 == 0 or f2 == 0:
        return UNSEEN_PMI

    return math.log(joint * catalog.corpus_size / (f1 * f2))


def distractor_weights(restrictor: int, catalog: Catalog) -> npt.NDArray[np.float64]:
    """Probability of drawing each object as a distractor for ``restrictor``.

    Weights are PMI values clipped below at ``0.01`` and normalized; the restrictor itself has probability zero.

    Raises
    ------
    GenerationError
        The catalog has no object other than the restrictor.
    """
    if len(catalog.objects) < 2:
        raise GenerationError("A scenario needs at least one object different from the restrictor.")

    return catalog._distractor_table[restrictor]
