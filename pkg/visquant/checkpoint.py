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
import struct
from collections.abc import Mapping
from pathlib import Path
from typing import Any, BinaryIO

import numpy as np
import numpy.typing as npt

from .exceptions import CheckpointError

__all__ = ("MAGIC", "VERSION", "save_checkpoint", "load_checkpoint")


logger: logging.Logger = logging.getLogger(__name__)


MAGIC: bytes = b"VQCK"
VERSION: int = 1

_U32 = struct.Struct("<I")


def _write_u32(fp: BinaryIO, value: int) -> None:
    fp.write(_U32.pack(value))


def _read_exact(fp: BinaryIO, size: int) -> bytes:
    data: bytes = fp.read(size)

    if len(data) != size:
        raise CheckpointError(f"Checkpoint is truncated: expected {size} bytes, got {len(data)}.")

    return data


def _read_u32(fp: BinaryIO) -> int:
    return _U32.unpack(_read_exact(fp, 4))[0]


def save_checkpoint(
    path: str | Path, tensors: Mapping[str, npt.ArrayLike], metadata: Mapping[str, Any] | None = None
) -> Path:
    """Write named tensors to a binary checkpoint.

    Layout, all integers little-endian 32-bit unsigned::

        magic "VQCK" | version | metadata length | metadata (UTF-8 JSON) | tensor count
        per tensor: name length | name (UTF-8) | rank | dims... | values (little-endian 64-bit reals)

    Tensors are written in the iteration order of ``tensors``.
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)

    meta: bytes = json.dumps(dict(metadata or {}), sort_keys=True).encode("utf-8")

    with target.open("wb") as fp:
        fp.write(MAGIC)
        _write_u32(fp, VERSION)
        _write_u32(fp, len(meta))
        fp.write(meta)
        _write_u32(fp, len(tensors))

        for name, value in tensors.items():
            array = np.asarray(value, dtype="<f8")
            encoded: bytes = name.encode("utf-8")

            _write_u32(fp, len(encoded))
            fp.write(encoded)
            _write_u32(fp, array.ndim)

            for dim in array.shape:
                _write_u32(fp, dim)

            fp.write(np.ascontiguousarray(array).tobytes())

    logger.debug(f"Saved {len(tensors)} tensors to {target}")
    return target


def load_checkpoint(path: str | Path) -> tuple[dict[str, npt.NDArray[np.float64]], dict[str, Any]]:
    """Read a checkpoint written by :func:`save_checkpoint`.

    Returns
    -------
    tuple[dict[str, numpy.ndarray], dict[str, Any]]
        The tensors in file order and the metadata block.

    Raises
    ------
    CheckpointError
        The file is missing, has the wrong magic or version, or is truncated.
    """
    source = Path(path)

    try:
        fp = source.open("rb")
    except FileNotFoundError:
        raise CheckpointError(f"No checkpoint found at {source}.") from None

    with fp:
        magic: bytes = fp.read(len(MAGIC))
        if magic != MAGIC:
            raise CheckpointError(f"{source} is not a checkpoint (magic {magic!r}).")

        version: int = _read_u32(fp)
        if version != VERSION:
            raise CheckpointError(f"Unsupported checkpoint version {version}; expected {VERSION}.")

        try:
            metadata: dict[str, Any] = json.loads(_read_exact(fp, _read_u32(fp)).decode("utf-8"))
        except ValueError as e:
            raise CheckpointError(f"Malformed checkpoint metadata in {source}: {e}") from e

        tensors: dict[str, npt.NDArray[np.float64]] = {}
        for _ in range(_read_u32(fp)):
            name: str = _read_exact(fp, _read_u32(fp)).decode("utf-8")
            shape: tuple[int, ...] = tuple(_read_u32(fp) for _ in range(_read_u32(fp)))
            count: int = int(np.prod(shape, dtype=np.int64))

            values = np.frombuffer(_read_exact(fp, 8 * count), dtype="<f8")
            tensors[name] = values.astype(np.float64).reshape(shape)

        if fp.read(1):
            raise CheckpointError(f"Trailing bytes after the last tensor in {source}.")

    return tensors, metadata
