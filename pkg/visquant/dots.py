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
import math
import struct
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt

from .enums import QuantifierLabel
from .exceptions import CheckpointError, ConfigError, RenderError, UndefinedRestrictorError
from .quantifiers import MIN_RESTRICTOR, SetCounts, feasible_counts, quantize_ratio
from .samples import Sample
from .utils import Provenance

__all__ = (
    "BACKGROUND",
    "WHITE",
    "BLACK",
    "DotConfig",
    "DotImage",
    "DotCorpus",
    "render_dots",
    "generate_dot_corpus",
    "save_dot_corpus",
    "load_dot_corpus",
)


logger: logging.Logger = logging.getLogger(__name__)


BACKGROUND: float = 0.5
WHITE: float = 1.0
BLACK: float = 0.0

FILE_MAGIC: bytes = b"VQDT"
IMAGE_MAGIC: bytes = b"VQDI"
FORMAT: int = 1

# Pixels are stored as bytes 0, 127 and 254 so that the background decodes to exactly 0.5.
_LEVELS: int = 254

_HEADER = struct.Struct("<4sIIIII")


@dataclass(frozen=True)
class DotConfig:
    """Knobs of the dot world.

    Attributes
    ----------
    height: int
        Image height in pixels. Defaults to ``64``.
    width: int
        Image width in pixels. Defaults to ``64``.
    radius: int
        Dot radius in pixels. Defaults to ``3``.
    margin: int
        Minimum free pixels between a dot and the frame, and between two dots. Defaults to ``2``.
    min_restrictor: int
        Smallest number of dots per image. Defaults to ``6``.
    max_restrictor: int
        Largest number of dots per image. Defaults to ``16``.
    attempts: int
        Placement attempts per dot before giving up. Defaults to ``1000``.
    """

    height: int = 64
    width: int = 64
    radius: int = 3
    margin: int = 2
    min_restrictor: int = MIN_RESTRICTOR
    max_restrictor: int = 16
    attempts: int = 1000

    def __post_init__(self) -> None:
        if self.radius < 1 or self.margin < 0 or self.attempts < 1:
            raise ConfigError("Dot radius and attempts must be positive and the margin nonnegative.")

        if min(self.height, self.width) < 2 * (self.radius + self.margin) + 1:
            raise ConfigError(f"A {self.height}x{self.width} frame can not hold a dot of radius {self.radius}.")

        if not 1 <= self.min_restrictor <= self.max_restrictor:
            raise ConfigError("Invalid restrictor bounds for the dot world.")

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


@dataclass(frozen=True, eq=False)
class DotImage:
    """A gray frame with ``white`` white dots and ``black`` black dots.

    White dots are the restrictor members holding the scope property, black dots the others, so the restrictor has
    ``white + black`` members.

    Attributes
    ----------
    identifier: int
        The datapoint id.
    pixels: numpy.ndarray
        ``H x W`` values in ``{0.0, 0.5, 1.0}``.
    white: int
        Number of white dots.
    black: int
        Number of black dots.
    """

    identifier: int
    pixels: npt.NDArray[np.float64]
    white: int
    black: int

    @property
    def counts(self) -> SetCounts:
        return SetCounts(self.white + self.black, self.white)

    @property
    def label(self) -> QuantifierLabel:
        return quantize_ratio(self.counts)

    @property
    def key(self) -> tuple[int, ...]:
        return (self.identifier,)

    def sample(self) -> Sample:
        return Sample(identifier=self.identifier, label=self.label, counts=self.counts, image=self.pixels)


def _disc(radius: int) -> npt.NDArray[np.bool_]:
    span = np.arange(-radius, radius + 1)
    return span[:, None] ** 2 + span[None, :] ** 2 <= radius**2


def render_dots(
    white: int,
    black: int,
    *,
    config: DotConfig = DotConfig(),
    seed: int | np.random.Generator = 0,
    identifier: int = 0,
) -> DotImage:
    """Draw ``white`` white and ``black`` black non-overlapping dots at random positions on a gray frame.

    Centers are rejection-sampled: each candidate must keep ``margin`` free pixels to the frame and to every dot
    already placed.

    Raises
    ------
    UndefinedRestrictorError
        No dot was requested.
    RenderError
        The dots do not fit the frame, or a dot could not be placed within ``config.attempts`` tries.
    """
    count: int = white + black

    if white < 0 or black < 0:
        raise ValueError(f"Dot counts must be nonnegative, got white={white}, black={black}.")

    if count == 0:
        raise UndefinedRestrictorError("An image needs at least one dot.")

    r, margin = config.radius, config.margin
    footprint: float = math.pi * (r + margin / 2) ** 2
    if count * footprint > 0.5 * config.height * config.width:
        raise RenderError(
            f"{count} dots of radius {r} do not fit a {config.height}x{config.width} frame.", count=count, attempts=0
        )

    rng: np.random.Generator = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    low: int = r + margin
    min_distance: float = 2 * r + margin

    centers: list[tuple[int, int]] = []
    tries: int = 0

    for _ in range(count):
        for _ in range(config.attempts):
            tries += 1
            y = int(rng.integers(low, config.height - low))
            x = int(rng.integers(low, config.width - low))

            if all(math.hypot(y - cy, x - cx) > min_distance for cy, cx in centers):
                centers.append((y, x))
                break
        else:
            raise RenderError(count=count, attempts=tries)

    pixels = np.full((config.height, config.width), BACKGROUND)
    disc = _disc(r)
    colors: list[float] = [WHITE] * white + [BLACK] * black

    for (y, x), color in zip(centers, colors):
        window = pixels[y - r : y + r + 1, x - r : x + r + 1]
        window[disc] = color

    return DotImage(identifier=identifier, pixels=pixels, white=white, black=black)


class DotCorpus:
    """A balanced collection of dot images.

    .. container:: operations

        .. describe:: len(corpus)

            The number of images.

        .. describe:: for image in corpus

            Iterate over the images in id order.
    """

    kind: str = "dots"

    def __init__(
        self, images: Sequence[DotImage], *, config: DotConfig, seed: int, provenance: Provenance | None = None
    ) -> None:
        self.datapoints: list[DotImage] = sorted(images, key=lambda i: i.identifier)
        self.config = config
        self.seed = seed
        self.provenance: Provenance = provenance or Provenance(seed=seed, config=config.to_dict())

        self._index: dict[int, DotImage] = {i.identifier: i for i in self.datapoints}

    def __repr__(self) -> str:
        return f"DotCorpus(images={len(self)}, size={self.config.height}x{self.config.width})"

    def __len__(self) -> int:
        return len(self.datapoints)

    def __iter__(self) -> Iterator[DotImage]:
        return iter(self.datapoints)

    def __getitem__(self, identifier: int) -> DotImage:
        return self._index[identifier]

    def subset(self, identifiers: Sequence[int]) -> list[DotImage]:
        return [self._index[i] for i in identifiers]

    def samples(self, images: Sequence[DotImage] | None = None) -> list[Sample]:
        return [i.sample() for i in (self.datapoints if images is None else images)]

    def save(self, path: str | Path) -> Path:
        return save_dot_corpus(self, path)

    @classmethod
    def load(cls, path: str | Path) -> DotCorpus:
        return load_dot_corpus(path)


def generate_dot_corpus(
    per_quantifier: int, config: DotConfig = DotConfig(), seed: int = 0, *, provenance: Provenance | None = None
) -> DotCorpus:
    """Render exactly ``per_quantifier`` images for every label.

    ``(m, k)`` is drawn uniformly from the pairs mapping to the label with ``min_restrictor <= m <= max_restrictor``,
    as for scene generation. Image ``i`` has its own generator seeded with ``(seed, i)``.
    """
    if per_quantifier < 1:
        raise ConfigError(f"At least one image per quantifier is required, got {per_quantifier}.")

    images: list[DotImage] = []

    for label in QuantifierLabel:
        choices = feasible_counts(label, min_m=config.min_restrictor, max_m=config.max_restrictor)

        for j in range(per_quantifier):
            identifier: int = int(label) * per_quantifier + j
            rng: np.random.Generator = np.random.default_rng([seed, identifier])
            counts = choices[int(rng.integers(len(choices)))]
            images.append(render_dots(counts.k, counts.m - counts.k, config=config, seed=rng, identifier=identifier))

    return DotCorpus(
        images,
        config=config,
        seed=seed,
        provenance=provenance or Provenance(command="dotsim", seed=seed, config=config.to_dict()),
    )


def save_dot_corpus(corpus: DotCorpus, path: str | Path) -> Path:
    """Write ``corpus`` to a single binary file.

    The file holds ``"VQDT"``, a format version, the length of a UTF-8 JSON metadata block and the block itself, then
    the image count. Every image follows as a header of ``"VQDI"``, height, width, white count, black count and id,
    and then ``height * width`` bytes where 0, 127 and 254 encode black, background and white.
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)

    meta: bytes = json.dumps(
        {
            "kind": "dots",
            "format": FORMAT,
            "count": len(corpus),
            "seed": corpus.seed,
            "config": corpus.config.to_dict(),
            "provenance": dict(corpus.provenance),
        },
        sort_keys=True,
    ).encode("utf-8")

    with target.open("wb") as fp:
        fp.write(FILE_MAGIC)
        fp.write(struct.pack("<II", FORMAT, len(meta)))
        fp.write(meta)
        fp.write(struct.pack("<I", len(corpus)))

        for image in corpus:
            h, w = image.pixels.shape
            fp.write(_HEADER.pack(IMAGE_MAGIC, h, w, image.white, image.black, image.identifier))
            fp.write(np.rint(image.pixels * _LEVELS).astype(np.uint8).tobytes())

    logger.info(f"Wrote {corpus!r} to {target}")
    return target


def _read(fp: Any, size: int, source: Path) -> bytes:
    data: bytes = fp.read(size)

    if len(data) != size:
        raise CheckpointError(f"Dot corpus {source} is truncated.")

    return data


def load_dot_corpus(path: str | Path) -> DotCorpus:
    """Read a file written by :func:`save_dot_corpus`.

    Raises
    ------
    CheckpointError
        The file is missing, not a dot corpus, or truncated.
    """
    source = Path(path)

    try:
        fp = source.open("rb")
    except FileNotFoundError:
        raise CheckpointError(f"No dot corpus found at {source}.") from None

    with fp:
        if _read(fp, len(FILE_MAGIC), source) != FILE_MAGIC:
            raise CheckpointError(f"{source} is not a dot corpus.")

        version, size = struct.unpack("<II", _read(fp, 8, source))
        if version != FORMAT:
            raise CheckpointError(f"Unsupported dot corpus format {version}; expected {FORMAT}.")

        meta: dict[str, Any] = json.loads(_read(fp, size, source).decode("utf-8"))
        (count,) = struct.unpack("<I", _read(fp, 4, source))

        images: list[DotImage] = []
        for _ in range(count):
            magic, h, w, white, black, identifier = _HEADER.unpack(_read(fp, _HEADER.size, source))

            if magic != IMAGE_MAGIC:
                raise CheckpointError(f"Corrupt image header in {source}.")

            raw = np.frombuffer(_read(fp, h * w, source), dtype=np.uint8)
            pixels = raw.astype(np.float64).reshape(h, w) / _LEVELS
            images.append(DotImage(identifier=identifier, pixels=pixels, white=white, black=black))

    return DotCorpus(
        images, config=DotConfig(**meta["config"]), seed=meta["seed"], provenance=Provenance(**meta["provenance"])
    )
