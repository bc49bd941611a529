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

import dataclasses
import json
import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np
import numpy.typing as npt

from .catalog import Catalog, distractor_weights
from .embeddings import EmbeddingTables, synth_embeddings
from .enums import QuantifierLabel
from .exceptions import CheckpointError, ConfigError, GenerationError
from .quantifiers import MIN_RESTRICTOR, SetCounts, feasible_counts, quantize_ratio
from .samples import Sample
from .utils import Provenance, read_json, write_json

if TYPE_CHECKING:
    from .types.corpus import CorpusMeta, DatapointRecord


__all__ = (
    "SynthConfig",
    "ObjectSlot",
    "Scenario",
    "Datapoint",
    "Corpus",
    "assemble_scenario",
    "generate_corpus",
)


logger: logging.Logger = logging.getLogger(__name__)


CORPUS_FORMAT: int = 1


@dataclass(frozen=True)
class SynthConfig:
    """Knobs of the synthetic world.

    Attributes
    ----------
    objects: int
        Number of object concepts in the catalog. Defaults to ``160``.
    properties: int
        Number of property concepts in the catalog. Defaults to ``24``.
    mean_plausible: float
        Mean number of plausible properties per object. Defaults to ``8``.
    dim: int
        Embedding dimension of words and slots. Defaults to ``32``.
    sigma: float
        Instance noise. Defaults to ``0.1``.
    slots: int
        Scenario size ``S``. Defaults to ``16``.
    min_restrictor: int
        Smallest restrictor cardinality. Defaults to ``6``, the smallest size at which all labels are reachable.
    max_properties: int
        Largest number of properties shown by one instance. Defaults to ``3``.
    """

    objects: int = 160
    properties: int = 24
    mean_plausible: float = 8.0
    dim: int = 32
    sigma: float = 0.1
    slots: int = 16
    min_restrictor: int = MIN_RESTRICTOR
    max_properties: int = 3

    def __post_init__(self) -> None:
        if self.slots < self.min_restrictor:
            raise ConfigError(f"Scenario size {self.slots} is below the minimum restrictor {self.min_restrictor}.")

        if self.min_restrictor < 1 or self.max_properties < 1 or self.dim < 4 or self.sigma < 0:
            raise ConfigError("Invalid synthetic world configuration.")

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


@dataclass(frozen=True, eq=False)
class ObjectSlot:
    """One member of a scenario: an object instance with its properties and its vector."""

    obj: int
    properties: frozenset[int]
    embedding: npt.NDArray[np.float64]


@dataclass(frozen=True, eq=False)
class Scenario:
    slots: tuple[ObjectSlot, ...]

    def __len__(self) -> int:
        return len(self.slots)

    @property
    def matrix(self) -> npt.NDArray[np.float64]:
        """The ``S x d`` matrix of slot vectors, in slot order."""
        return np.stack([s.embedding for s in self.slots])


@dataclass(frozen=True, eq=False)
class Datapoint:
    """A ``<query, scenario, answer>`` triple with the counts it was generated from.

    Attributes
    ----------
    identifier: int
        The datapoint id. Every datapoint owns its scenario, so this is also the scenario id.
    scenario: :class:`Scenario`
        The slots to quantify over.
    restrictor: int
        The object id named by the query noun.
    scope: int
        The property id named by the query adjective.
    label: :class:`~visquant.QuantifierLabel`
        The ground-truth answer, ``quantize_ratio(counts)``.
    counts: :class:`~visquant.SetCounts`
        Restrictor and target cardinalities.
    distractors_with_scope: int
        Number of distractor slots that also show the scope property.
    """

    identifier: int
    scenario: Scenario
    restrictor: int
    scope: int
    label: QuantifierLabel
    counts: SetCounts
    distractors_with_scope: int

    @property
    def query(self) -> tuple[int, int]:
        return (self.restrictor, self.scope)

    @property
    def key(self) -> tuple[int, int, int]:
        """The ``(scenario, restrictor, scope)`` combination that must never repeat across partitions."""
        return (self.identifier, self.restrictor, self.scope)


def _pick_properties(
    rng: np.random.Generator, pool: Sequence[int], size: int, *, required: int | None = None
) -> frozenset[int]:
    chosen: set[int] = {required} if required is not None else set()
    free: list[int] = [p for p in pool if p != required]
    extra: int = min(size - len(chosen), len(free))

    if extra > 0:
        chosen.update(int(p) for p in rng.choice(free, size=extra, replace=False))

    return frozenset(chosen)


def assemble_scenario(
    query: tuple[int, int],
    label: QuantifierLabel,
    catalog: Catalog,
    tables: EmbeddingTables,
    *,
    config: SynthConfig = SynthConfig(),
    seed: int | np.random.Generator = 0,
    identifier: int = 0,
) -> Datapoint:
    """Build one datapoint whose answer is ``label``.

    ``(m, k)`` is drawn uniformly from every pair with ``min_restrictor <= m <= slots`` that quantizes to ``label``.
    ``k`` restrictor instances show the scope property, the other ``m - k`` show only other plausible properties, or
    none when the scope is the restrictor's only plausible property.
    The remaining slots are distractors drawn by PMI with the restrictor; they may show the scope property.
    The slot order is randomly permuted.

    Parameters
    ----------
    query: tuple[int, int]
        The ``(object, property)`` ids of the query. Must be a plausible pair.
    label: :class:`~visquant.QuantifierLabel`
        The answer to generate a scenario for.
    catalog: :class:`~visquant.Catalog`
        The concepts and their statistics.
    tables: :class:`~visquant.EmbeddingTables`
        Vectors used to embed each slot.
    config: :class:`SynthConfig`
        Scenario size and instance knobs.
    seed: int | numpy.random.Generator
        Seed or generator for every draw. The same seed gives the same datapoint.
    identifier: int
        The id given to the datapoint.

    Raises
    ------
    GenerationError
        The query is implausible, or ``label`` can not be reached with the configured scenario size.
    """
    rng: np.random.Generator = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    restrictor, scope = query

    if not catalog.is_plausible(restrictor, scope):
        raise GenerationError(
            f"Query ({catalog.objects[restrictor]}, {catalog.properties[scope]}) is not plausible.", label=label
        )

    choices: list[SetCounts] = feasible_counts(label, min_m=config.min_restrictor, max_m=config.slots)
    if not choices:
        raise GenerationError(label=label, slots=config.slots)

    counts: SetCounts = choices[int(rng.integers(len(choices)))]
    others: list[int] = [p for p in catalog.plausible[restrictor] if p != scope]

    members: list[tuple[int, frozenset[int]]] = []
    for i in range(counts.m):
        size: int = int(rng.integers(1, config.max_properties + 1))

        if i < counts.k:
            props = _pick_properties(rng, catalog.plausible[restrictor], size, required=scope)
        else:
            props = _pick_properties(rng, others, size)

        members.append((restrictor, props))

    weights = distractor_weights(restrictor, catalog)
    distractor_ids = rng.choice(len(catalog.objects), size=config.slots - counts.m, p=weights)

    with_scope: int = 0
    for obj in distractor_ids:
        size = int(rng.integers(1, config.max_properties + 1))
        props = _pick_properties(rng, catalog.plausible[int(obj)], size)
        with_scope += scope in props
        members.append((int(obj), props))

    order = rng.permutation(config.slots)
    slots: tuple[ObjectSlot, ...] = tuple(
        ObjectSlot(members[i][0], members[i][1], tables.instance(members[i][0], sorted(members[i][1]), rng))
        for i in order
    )

    return Datapoint(
        identifier=identifier,
        scenario=Scenario(slots),
        restrictor=restrictor,
        scope=scope,
        label=quantize_ratio(counts),
        counts=counts,
        distractors_with_scope=with_scope,
    )


class Corpus:
    """A balanced collection of datapoints together with the catalog and tables that produced it.

    .. container:: operations

        .. describe:: len(corpus)

            The number of datapoints.

        .. describe:: for datapoint in corpus

            Iterate over the datapoints in id order.

        .. describe:: corpus[identifier]

            Retrieve a datapoint by id.
    """

    def __init__(
        self,
        datapoints: Sequence[Datapoint],
        *,
        catalog: Catalog,
        tables: EmbeddingTables,
        config: SynthConfig,
        seed: int,
        provenance: Provenance | None = None,
    ) -> None:
        self.datapoints: list[Datapoint] = sorted(datapoints, key=lambda d: d.identifier)
        self.catalog = catalog
        self.tables = tables
        self.config = config
        self.seed = seed
        self.provenance: Provenance = provenance or Provenance(seed=seed, config=config.to_dict())

        self._index: dict[int, Datapoint] = {d.identifier: d for d in self.datapoints}

    def __repr__(self) -> str:
        return f"Corpus(datapoints={len(self)}, catalog={self.catalog!r})"

    def __len__(self) -> int:
        return len(self.datapoints)

    def __iter__(self) -> Iterator[Datapoint]:
        return iter(self.datapoints)

    def __getitem__(self, identifier: int) -> Datapoint:
        return self._index[identifier]

    def subset(self, identifiers: Sequence[int]) -> list[Datapoint]:
        return [self._index[i] for i in identifiers]

    def sample(self, datapoint: Datapoint) -> Sample:
        n_objects: int = len(self.catalog.objects)

        return Sample(
            identifier=datapoint.identifier,
            label=datapoint.label,
            counts=datapoint.counts,
            distractors_with_scope=datapoint.distractors_with_scope,
            restrictor=datapoint.restrictor,
            scope=n_objects + datapoint.scope,
            visual=datapoint.scenario.matrix,
            restrictor_vector=self.tables.objects[datapoint.restrictor],
            scope_vector=self.tables.properties[datapoint.scope],
        )

    def samples(self, datapoints: Sequence[Datapoint] | None = None) -> list[Sample]:
        return [self.sample(d) for d in (self.datapoints if datapoints is None else datapoints)]

    def save(self, directory: str | Path) -> Path:
        """Write the corpus to ``directory``.

        The directory receives ``catalog.json``, ``corpus.json`` (metadata and provenance), ``index.jsonl`` with one
        record per datapoint, and ``vectors.f32``: little-endian 32-bit reals, word vectors first (objects then
        properties), then ``S`` consecutive rows per datapoint.
        """
        root = Path(directory)
        root.mkdir(parents=True, exist_ok=True)

        words = self.tables.words
        word_rows: int = words.shape[0]
        slots: int = self.config.slots
        n_objects: int = len(self.catalog.objects)

        blocks: list[npt.NDArray[np.float64]] = [words]
        with (root / "index.jsonl").open("w", encoding="utf-8") as fp:
            for i, d in enumerate(self.datapoints):
                record: DatapointRecord = {
                    "id": d.identifier,
                    "scenario": d.identifier,
                    "restrictor": d.restrictor,
                    "scope": d.scope,
                    "label": d.label.word,
                    "m": d.counts.m,
                    "k": d.counts.k,
                    "distractors_with_scope": d.distractors_with_scope,
                    "objects": [s.obj for s in d.scenario.slots],
                    "properties": [sorted(s.properties) for s in d.scenario.slots],
                    "row": word_rows + i * slots,
                    "restrictor_row": d.restrictor,
                    "scope_row": n_objects + d.scope,
                }
                fp.write(json.dumps(record, sort_keys=True) + "\n")
                blocks.append(d.scenario.matrix)

        np.concatenate(blocks, axis=0).astype("<f4").tofile(root / "vectors.f32")
        self.catalog.save(root / "catalog.json")

        meta: CorpusMeta = {
            "kind": "scenes",
            "format": CORPUS_FORMAT,
            "count": len(self),
            "seed": self.seed,
            "config": self.config.to_dict(),
            "provenance": dict(self.provenance),
            "dim": self.tables.dim,
            "slots": slots,
            "word_rows": word_rows,
        }
        write_json(root / "corpus.json", meta)

        logger.info(f"Wrote {self!r} to {root}")
        return root

    @classmethod
    def load(cls, directory: str | Path) -> Corpus:
        """Read a corpus written by :meth:`save`.

        Raises
        ------
        CheckpointError
            The directory does not hold a scene corpus, or the vector file is truncated.
        """
        root = Path(directory)

        try:
            meta: CorpusMeta = read_json(root / "corpus.json")
        except FileNotFoundError:
            raise CheckpointError(f"No corpus found at {root}.") from None

        if meta.get("kind") != "scenes" or meta.get("format") != CORPUS_FORMAT:
            raise CheckpointError(f"{root} does not hold a scene corpus of format {CORPUS_FORMAT}.")

        config = SynthConfig(**meta["config"])
        dim: int = meta["dim"]
        catalog = Catalog.load(root / "catalog.json")

        vectors = np.fromfile(root / "vectors.f32", dtype="<f4").astype(np.float64)
        if vectors.size % dim:
            raise CheckpointError(f"Vector file of {root} is truncated.")

        vectors = vectors.reshape(-1, dim)
        n_objects: int = len(catalog.objects)
        word_rows: int = meta["word_rows"]
        tables = EmbeddingTables(vectors[:n_objects], vectors[n_objects:word_rows], sigma=config.sigma)

        datapoints: list[Datapoint] = []
        with (root / "index.jsonl").open(encoding="utf-8") as fp:
            for line in fp:
                if not line.strip():
                    continue

                record: DatapointRecord = json.loads(line)
                row: int = record["row"]

                if row + config.slots > vectors.shape[0]:
                    raise CheckpointError(f"Vector file of {root} is truncated.")

                slots = tuple(
                    ObjectSlot(obj, frozenset(props), vectors[row + j])
                    for j, (obj, props) in enumerate(zip(record["objects"], record["properties"]))
                )
                datapoints.append(
                    Datapoint(
                        identifier=record["id"],
                        scenario=Scenario(slots),
                        restrictor=record["restrictor"],
                        scope=record["scope"],
                        label=QuantifierLabel.from_word(record["label"]),
                        counts=SetCounts(record["m"], record["k"]),
                        distractors_with_scope=record["distractors_with_scope"],
                    )
                )

        if len(datapoints) != meta["count"]:
            raise CheckpointError(f"Index of {root} lists {len(datapoints)} datapoints, expected {meta['count']}.")

        return cls(
            datapoints,
            catalog=catalog,
            tables=tables,
            config=config,
            seed=meta["seed"],
            provenance=Provenance(meta["provenance"]),
        )


def generate_corpus(
    per_quantifier: int,
    catalog: Catalog,
    config: SynthConfig,
    seed: int,
    *,
    tables: EmbeddingTables | None = None,
    provenance: Provenance | None = None,
) -> Corpus:
    """Generate exactly ``per_quantifier`` datapoints for every label.

    Queries are drawn uniformly over the plausible pairs of ``catalog``. Datapoint ``i`` is generated from its own
    generator seeded with ``(seed, i)``, so datapoints can be produced independently and in any order.

    Raises
    ------
    ConfigError
        ``per_quantifier`` is below one.
    GenerationError
        A datapoint could not be generated.
    """
    if per_quantifier < 1:
        raise ConfigError(f"At least one datapoint per quantifier is required, got {per_quantifier}.")

    if tables is None:
        tables = synth_embeddings(catalog, config.dim, config.sigma, seed)

    queries: list[tuple[int, int]] = catalog.queries
    datapoints: list[Datapoint] = []

    for label in QuantifierLabel:
        for j in range(per_quantifier):
            identifier: int = int(label) * per_quantifier + j
            rng: np.random.Generator = np.random.default_rng([seed, identifier])
            query = queries[int(rng.integers(len(queries)))]

            datapoints.append(
                assemble_scenario(query, label, catalog, tables, config=config, seed=rng, identifier=identifier)
            )

        logger.debug(f"Generated {per_quantifier} datapoints labelled {label.word}")

    return Corpus(
        datapoints,
        catalog=catalog,
        tables=tables,
        config=config,
        seed=seed,
        provenance=provenance or Provenance(command="generate", seed=seed, config=config.to_dict()),
    )
