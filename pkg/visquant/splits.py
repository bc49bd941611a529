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
import operator
from collections import defaultdict
from collections.abc import Callable, Hashable, Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any, Protocol, TypeVar

import numpy as np

from .enums import QuantifierLabel, SplitSetting
from .exceptions import ConfigError, LeakageError, SplitError
from .utils import Provenance

if TYPE_CHECKING:
    from .dots import DotCorpus
    from .scenarios import Corpus, Datapoint
    from .types.corpus import ManifestHeader


__all__ = (
    "PARTITIONS",
    "SplitSpec",
    "SplitResult",
    "split",
    "partition_units",
    "check_leakage",
    "write_manifests",
    "read_manifests",
)


logger: logging.Logger = logging.getLogger(__name__)


PARTITIONS: tuple[str, str, str] = ("train", "val", "test")

T = TypeVar("T", bound=Hashable)


class Labelled(Protocol):
    @property
    def identifier(self) -> int: ...

    @property
    def label(self) -> QuantifierLabel: ...

    @property
    def key(self) -> tuple[int, ...]: ...


@dataclass(frozen=True)
class SplitSpec:
    """How to partition a corpus.

    Attributes
    ----------
    setting: :class:`~visquant.SplitSetting`
        Which units are held out. Defaults to :attr:`~visquant.SplitSetting.UNC`.
    fractions: tuple[float, float, float]
        Train, validation and test shares. Must be positive and sum to one. Defaults to ``(0.7, 0.15, 0.15)``.
    seed: int
        Seed for every shuffle.
    exclude_heldout_distractors: bool
        For :attr:`~visquant.SplitSetting.UnsObj` and :attr:`~visquant.SplitSetting.UnsProp`: drop training
        datapoints whose scenario shows a held-out object (or property) in any slot, not only as the queried one.
        Defaults to ``False``.
    """

    setting: SplitSetting = SplitSetting.UNC
    fractions: tuple[float, float, float] = (0.7, 0.15, 0.15)
    seed: int = 0
    exclude_heldout_distractors: bool = False

    def __post_init__(self) -> None:
        if len(self.fractions) != 3 or any(f <= 0 for f in self.fractions):
            raise ConfigError(f"Split fractions must be three positive values, got {self.fractions}.")

        if not math.isclose(sum(self.fractions), 1.0, abs_tol=1e-9):
            raise ConfigError(f"Split fractions must sum to 1, got {sum(self.fractions)}.")

    @property
    def train_fraction(self) -> float:
        return self.fractions[0]

    @property
    def val_share(self) -> float:
        """Share of the held-out data given to validation."""
        return self.fractions[1] / (self.fractions[1] + self.fractions[2])


@dataclass(frozen=True)
class SplitResult:
    """Datapoint ids of the three partitions.

    Attributes
    ----------
    train: tuple[int, ...]
        Training ids, sorted.
    val: tuple[int, ...]
        Validation ids, sorted.
    test: tuple[int, ...]
        Test ids, sorted.
    spec: :class:`SplitSpec`
        The spec that produced this split.
    heldout: tuple
        The held-out units: object ids, property ids or ``(object, property)`` queries. Empty for
        :attr:`~visquant.SplitSetting.UNC`.
    """

    train: tuple[int, ...]
    val: tuple[int, ...]
    test: tuple[int, ...]
    spec: SplitSpec
    heldout: tuple[Any, ...] = field(default=())

    def __getitem__(self, partition: str) -> tuple[int, ...]:
        if partition not in PARTITIONS:
            raise KeyError(f'Unknown partition "{partition}". Expected one of {", ".join(PARTITIONS)}.')

        return getattr(self, partition)

    def items(self) -> Iterable[tuple[str, tuple[int, ...]]]:
        return ((name, self[name]) for name in PARTITIONS)


def partition_units(units: Sequence[T], fraction: float, rng: np.random.Generator) -> tuple[list[T], list[T]]:
    """Shuffle ``units`` and give ``ceil(fraction * len(units))`` of them to training, the rest to held-out.

    Raises
    ------
    SplitError
        Fewer than two units, or nothing would be held out.
    """
    if len(units) < 2:
        raise SplitError(f"At least two units are required to hold some out, got {len(units)}.")

    order = rng.permutation(len(units))
    shuffled: list[T] = [units[int(i)] for i in order]
    count: int = math.ceil(len(units) * fraction - 1e-9)

    if count >= len(units):
        raise SplitError(f"Training fraction {fraction} leaves none of {len(units)} units held out.")

    return shuffled[:count], shuffled[count:]


def _balanced(items: Sequence[Labelled], rng: np.random.Generator) -> list[Labelled]:
    by_label: defaultdict[QuantifierLabel, list[Labelled]] = defaultdict(list)

    for item in items:
        by_label[item.label].append(item)

    if len(by_label) < len(QuantifierLabel):
        return []

    size: int = min(len(v) for v in by_label.values())
    kept: list[Labelled] = []

    for label in QuantifierLabel:
        group = by_label[label]
        order = rng.permutation(len(group))
        kept.extend(group[int(i)] for i in order[:size])

    return kept


def _divide_heldout(items: Sequence[Labelled], share: float, rng: np.random.Generator) -> tuple[list, list]:
    by_label: defaultdict[QuantifierLabel, list[Labelled]] = defaultdict(list)
    for item in items:
        by_label[item.label].append(item)

    val: list[Labelled] = []
    test: list[Labelled] = []

    for label in QuantifierLabel:
        group = by_label[label]
        order = rng.permutation(len(group))
        cut: int = round(len(group) * share)
        val.extend(group[int(i)] for i in order[:cut])
        test.extend(group[int(i)] for i in order[cut:])

    return val, test


def _ids(items: Iterable[Labelled]) -> tuple[int, ...]:
    return tuple(sorted(item.identifier for item in items))


def _split_unc(items: Sequence[Labelled], spec: SplitSpec, rng: np.random.Generator) -> SplitResult:
    by_label: defaultdict[QuantifierLabel, list[Labelled]] = defaultdict(list)
    for item in items:
        by_label[item.label].append(item)

    size: int = min((len(by_label[label]) for label in QuantifierLabel), default=0)
    if size < 3:
        raise SplitError(f"UNC needs at least three datapoints per label, got {size}.")

    train_size: int = min(math.ceil(size * spec.train_fraction - 1e-9), size - 2)
    val_size: int = max(round((size - train_size) * spec.val_share), 1)
    val_size = min(val_size, size - train_size - 1)

    train: list[Labelled] = []
    val: list[Labelled] = []
    test: list[Labelled] = []

    for label in QuantifierLabel:
        group = by_label[label]
        order = [group[int(i)] for i in rng.permutation(len(group))][:size]
        train.extend(order[:train_size])
        val.extend(order[train_size : train_size + val_size])
        test.extend(order[train_size + val_size :])

    return SplitResult(_ids(train), _ids(val), _ids(test), spec)


def _cover_words(queries: Sequence[tuple[int, int]], spec: SplitSpec, rng: np.random.Generator) -> tuple[list, list]:
    order: list[tuple[int, int]] = [queries[int(i)] for i in rng.permutation(len(queries))]
    target: int = math.ceil(len(queries) * spec.train_fraction - 1e-9)

    train: list[tuple[int, int]] = []
    chosen: set[tuple[int, int]] = set()
    objects: set[int] = set()
    properties: set[int] = set()

    # Every word of every query must be seen in training.
    for query in order:
        if query[0] not in objects or query[1] not in properties:
            train.append(query)
            chosen.add(query)
            objects.add(query[0])
            properties.add(query[1])

    if len(train) > target:
        logger.warning(
            f"Covering every word needs {len(train)} training queries, more than the {target} requested. "
            f"Moving {len(train) - target} queries to training."
        )

    for query in order:
        if len(train) >= target:
            break

        if query not in chosen:
            train.append(query)
            chosen.add(query)

    heldout: list[tuple[int, int]] = [q for q in order if q not in chosen]
    if not heldout:
        raise SplitError(f"Every one of the {len(queries)} queries is needed in training; nothing can be held out.")

    return train, heldout


_UNITS: dict[SplitSetting, Callable[[Any], Any]] = {
    SplitSetting.UnsObj: operator.attrgetter("restrictor"),
    SplitSetting.UnsProp: operator.attrgetter("scope"),
    SplitSetting.UnsQue: operator.attrgetter("query"),
}


def _split_heldout(corpus: Corpus, spec: SplitSpec, rng: np.random.Generator) -> SplitResult:
    datapoints: list[Datapoint] = list(corpus)
    unit: Callable[[Datapoint], Any] = _UNITS[spec.setting]

    units: list[Any] = sorted({unit(d) for d in datapoints})

    if spec.setting is SplitSetting.UnsQue:
        train_units, heldout_units = _cover_words(units, spec, rng)
    else:
        train_units, heldout_units = partition_units(units, spec.train_fraction, rng)

    held: set[Any] = set(heldout_units)
    train_pool: list[Datapoint] = [d for d in datapoints if unit(d) not in held]
    heldout_pool: list[Datapoint] = [d for d in datapoints if unit(d) in held]

    if spec.exclude_heldout_distractors and spec.setting is SplitSetting.UnsObj:
        train_pool = [d for d in train_pool if not any(s.obj in held for s in d.scenario.slots)]
    elif spec.exclude_heldout_distractors and spec.setting is SplitSetting.UnsProp:
        train_pool = [d for d in train_pool if not any(s.properties & held for s in d.scenario.slots)]

    train = _balanced(train_pool, rng)
    val_pool, test_pool = _divide_heldout(heldout_pool, spec.val_share, rng)
    val, test = _balanced(val_pool, rng), _balanced(test_pool, rng)

    for name, part in (("train", train), ("val", val), ("test", test)):
        if not part:
            raise SplitError(
                f"The {name} partition of {spec.setting.value} misses at least one label. "
                "Generate a larger corpus or change the fractions."
            )

    logger.debug(f"{spec.setting.value}: {len(train_units)} training units, {len(heldout_units)} held out")
    return SplitResult(_ids(train), _ids(val), _ids(test), spec, tuple(sorted(held)))


def split(corpus: Corpus | DotCorpus, spec: SplitSpec) -> SplitResult:
    """Partition ``corpus`` into training, validation and test datapoints.

    Every partition is balanced per label. Held-out data is divided equally between validation and test in the
    default fractions; rounding favors training. The leakage checks of :func:`check_leakage` run on the result
    before it is returned.

    Raises
    ------
    SplitError
        Too few units to split, a partition would miss a label, or the setting is not available for the corpus.
    LeakageError
        A leakage check failed.
    """
    rng: np.random.Generator = np.random.default_rng(spec.seed)
    kind: str = getattr(corpus, "kind", "scenes")

    if spec.setting is SplitSetting.UNC:
        result = _split_unc(list(corpus), spec, rng)
    elif kind != "scenes":
        raise SplitError(f"The {spec.setting.value} setting needs queries; {kind} corpora only support unc.")
    else:
        result = _split_heldout(corpus, spec, rng)  # type: ignore

    check_leakage(corpus, result)
    logger.info(
        f"Split {len(corpus)} datapoints ({spec.setting.value}): "
        f"train={len(result.train)}, val={len(result.val)}, test={len(result.test)}"
    )
    return result


def _assert_disjoint(name: str, left: set[Any], right: set[Any]) -> None:
    overlap = left & right
    if overlap:
        raise LeakageError(f"{name}: {len(overlap)} shared entries.", overlap=sorted(overlap))


def check_leakage(corpus: Corpus | DotCorpus, result: SplitResult) -> None:
    """Assert that ``result`` leaks nothing across partitions.

    Checks datapoint disjointness and ``(scenario, restrictor, scope)`` key disjointness in every setting. Held-out
    settings also check that no held-out object, property or query is asked in training. For
    :attr:`~visquant.SplitSetting.UnsQue` every word of a held-out query must be asked in some training query.

    Raises
    ------
    LeakageError
        One of the checks failed.
    """
    lookup: dict[int, Any] = {d.identifier: d for d in corpus}
    parts: dict[str, list[Any]] = {name: [lookup[i] for i in ids] for name, ids in result.items()}

    for a, b in (("train", "val"), ("train", "test"), ("val", "test")):
        _assert_disjoint(f"{a}/{b} datapoints", set(result[a]), set(result[b]))
        _assert_disjoint(f"{a}/{b} keys", {d.key for d in parts[a]}, {d.key for d in parts[b]})

    setting: SplitSetting = result.spec.setting
    if setting is SplitSetting.UNC:
        return

    train: list[Datapoint] = parts["train"]
    heldout: list[Datapoint] = parts["val"] + parts["test"]

    if setting is SplitSetting.UnsObj:
        _assert_disjoint("held-out objects", {d.restrictor for d in train}, {d.restrictor for d in heldout})

        if result.spec.exclude_heldout_distractors:
            shown = {s.obj for d in train for s in d.scenario.slots}
            _assert_disjoint("held-out objects shown in training", shown, {d.restrictor for d in heldout})

    elif setting is SplitSetting.UnsProp:
        _assert_disjoint("held-out properties", {d.scope for d in train}, {d.scope for d in heldout})

        if result.spec.exclude_heldout_distractors:
            shown = {p for d in train for s in d.scenario.slots for p in s.properties}
            _assert_disjoint("held-out properties shown in training", shown, {d.scope for d in heldout})

    else:
        _assert_disjoint("held-out queries", {d.query for d in train}, {d.query for d in heldout})

        objects = {d.restrictor for d in train}
        properties = {d.scope for d in train}
        unseen = sorted(d.query for d in heldout if d.restrictor not in objects or d.scope not in properties)

        if unseen:
            raise LeakageError(f"{len(unseen)} held-out queries use a word never asked in training.", overlap=unseen)


def write_manifests(
    result: SplitResult, directory: str | Path, *, corpus: str | Path, provenance: Provenance | None = None
) -> list[Path]:
    """Write ``train.txt``, ``val.txt`` and ``test.txt`` to ``directory``.

    Each file starts with a ``#`` line holding the JSON :class:`~visquant.types.corpus.ManifestHeader`, followed by
    one datapoint id per line.
    """
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)

    spec: SplitSpec = result.spec
    prov = provenance or Provenance(command="split", seed=spec.seed)
    paths: list[Path] = []

    for name, ids in result.items():
        header: ManifestHeader = {
            "corpus": str(Path(corpus).resolve()),
            "partition": name,
            "setting": spec.setting.value,
            "fractions": list(spec.fractions),
            "seed": spec.seed,
            "exclude_heldout_distractors": spec.exclude_heldout_distractors,
            "heldout": [list(u) if isinstance(u, tuple) else u for u in result.heldout],
            "provenance": dict(prov),
        }

        lines: list[str] = ["# " + json.dumps(header, sort_keys=True)] + [str(i) for i in ids]
        path = root / f"{name}.txt"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        paths.append(path)

    logger.info(f"Wrote split manifests to {root}")
    return paths


def read_manifests(directory: str | Path) -> tuple[SplitResult, ManifestHeader]:
    """Read manifests written by :func:`write_manifests`.

    Returns
    -------
    tuple[:class:`SplitResult`, :class:`~visquant.types.corpus.ManifestHeader`]
        The split and the header of its training manifest, which names the corpus.

    Raises
    ------
    SplitError
        A manifest is missing or malformed, or the headers disagree.
    """
    root = Path(directory)
    ids: dict[str, tuple[int, ...]] = {}
    headers: list[ManifestHeader] = []

    for name in PARTITIONS:
        path = root / f"{name}.txt"

        try:
            lines = path.read_text(encoding="utf-8").splitlines()
        except FileNotFoundError:
            raise SplitError(f"Missing split manifest {path}.") from None

        if not lines or not lines[0].startswith("#"):
            raise SplitError(f"Split manifest {path} has no header line.")

        try:
            headers.append(json.loads(lines[0][1:]))
            ids[name] = tuple(int(line) for line in lines[1:] if line.strip())
        except ValueError as e:
            raise SplitError(f"Malformed split manifest {path}: {e}") from e

    first: ManifestHeader = headers[0]
    for other in headers[1:]:
        if (other["corpus"], other["setting"], other["seed"]) != (first["corpus"], first["setting"], first["seed"]):
            raise SplitError(f"Split manifests in {root} come from different splits.")

    spec = SplitSpec(
        setting=SplitSetting.parse(first["setting"]),
        fractions=tuple(first["fractions"]),  # type: ignore
        seed=first["seed"],
        exclude_heldout_distractors=first["exclude_heldout_distractors"],
    )
    heldout = tuple(tuple(u) if isinstance(u, list) else u for u in first["heldout"])

    return SplitResult(ids["train"], ids["val"], ids["test"], spec, heldout), first
