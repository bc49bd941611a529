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

import hashlib
import json
from pathlib import Path
from types import SimpleNamespace
from typing import Any, Iterator

from . import __version__

__all__ = (
    "Namespace",
    "Provenance",
    "write_json",
    "read_json",
    "file_digest",
)


class Namespace(SimpleNamespace):
    def __iter__(self) -> Iterator[tuple[str, Any]]:
        return iter(self.__dict__.items())


class Provenance(Namespace):
    """A subclass of :class:`types.SimpleNamespace` describing how an artifact was produced.

    You can construct this namespace with a :class:`dict` of `str` keys and `Any` value, or with keyword pairs or
    with a mix of both. The package version is always recorded. Every corpus, split manifest, checkpoint and report
    embeds one of these.

    You can access a dict version of this namespace by calling `dict()` on an instance.


    Examples
    --------

        .. code:: python

            prov: Provenance = Provenance({"command": "generate"}, seed=7, config={"dim": 32})

            print(prov.seed)
            print(dict(prov))
    """

    def __init__(self, __dict: dict[str, Any] | None = None, /, **kwargs: Any) -> None:
        updated = (__dict or {}) | kwargs
        updated.setdefault("version", __version__)
        super().__init__(**updated)


def write_json(path: str | Path, payload: Any) -> Path:
    """Write ``payload`` as indented JSON with sorted keys so that identical inputs give identical bytes."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return target


def read_json(path: str | Path) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def file_digest(path: str | Path) -> str:
    digest = hashlib.sha256()

    with Path(path).open("rb") as fp:
        for chunk in iter(lambda: fp.read(1 << 16), b""):
            digest.update(chunk)

    return digest.hexdigest()
