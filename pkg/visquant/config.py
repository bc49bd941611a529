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
import os
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .dots import DotConfig
from .enums import Architecture, SplitSetting
from .exceptions import ConfigError
from .models import ModelSpec
from .scenarios import SynthConfig
from .splits import SplitSpec
from .training import TrainConfig

__all__ = ("OUTPUT_ENV", "RunConfig", "default_output_dir", "read_config_file")


logger: logging.Logger = logging.getLogger(__name__)


OUTPUT_ENV: str = "VISQUANT_OUTPUT_DIR"


def _boolean(value: Any) -> bool:
    if isinstance(value, bool):
        return value

    cleaned = str(value).strip().lower()
    if cleaned in ("1", "true", "yes", "on"):
        return True
    if cleaned in ("0", "false", "no", "off"):
        return False

    raise ValueError(f'"{value}" is not a boolean')


def _fractions(value: Any) -> tuple[float, float, float]:
    parts = value.split(",") if isinstance(value, str) else list(value)

    if len(parts) != 3:
        raise ValueError(f'"{value}" is not three comma separated fractions')

    return (float(parts[0]), float(parts[1]), float(parts[2]))


KEYS: dict[str, Callable[[Any], Any]] = {
    "seed": int,
    "out": str,
    "objects": int,
    "properties": int,
    "mean_plausible": float,
    "per_quantifier": int,
    "dim": int,
    "sigma": float,
    "slots": int,
    "setting": str,
    "fractions": _fractions,
    "exclude_heldout_distractors": _boolean,
    "arch": str,
    "d_embed": int,
    "d_hidden": int,
    "d_mem": int,
    "stacks": int,
    "qmn_softmax_s2": _boolean,
    "filters": int,
    "receptive_field": int,
    "stride": int,
    "learning_rate": float,
    "batch_size": int,
    "max_epochs": int,
    "patience": int,
    "size": int,
    "radius": int,
    "bins": int,
}


def default_output_dir() -> Path:
    """The output directory used when ``--out`` is not given: ``$VISQUANT_OUTPUT_DIR`` or ``./runs``."""
    return Path(os.environ.get(OUTPUT_ENV) or "runs")


def _convert(key: str, value: Any, source: str) -> Any:
    try:
        converter = KEYS[key]
    except KeyError:
        raise ConfigError(f'Unknown setting "{key}" in {source}.') from None

    try:
        return converter(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f'Invalid value for "{key}" in {source}: {e}') from e


def read_config_file(path: str | Path) -> dict[str, Any]:
    """Parse a plain-text ``key = value`` file.

    Blank lines and everything after a ``#`` are ignored. Keys use the long flag names with underscores, for
    example ``learning_rate = 0.1`` or ``fractions = 0.8, 0.1, 0.1``.

    Raises
    ------
    ConfigError
        The file is missing, a line is not a ``key = value`` pair, or a key is unknown.
    """
    source = Path(path)

    try:
        text = source.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"Config file {source} does not exist.") from None

    values: dict[str, Any] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue

        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"{source}:{number}: expected key = value, got {raw!r}.")

        name = key.strip().replace("-", "_")
        values[name] = _convert(name, value.strip(), f"{source}:{number}")

    return values


@dataclass(frozen=True)
class RunConfig:
    """The settings of one CLI invocation, merged from a config file and command line flags.

    Attributes
    ----------
    command: str
        The subcommand being run.
    values: Mapping[str, Any]
        Every setting that was given, converted to its type. Missing keys fall back to the library defaults.
    """

    command: str
    values: Mapping[str, Any] = field(default_factory=dict)

    @classmethod
    def from_sources(
        cls, command: str, flags: Mapping[str, Any], config_file: str | Path | None = None
    ) -> RunConfig:
        """Merge ``config_file`` with ``flags``; flags that were given win.

        Flags left at ``None`` count as not given. Flags that are not settings, such as paths or the log level,
        are ignored here.
        """
        merged: dict[str, Any] = read_config_file(config_file) if config_file else {}

        for key, value in flags.items():
            if key in KEYS and value is not None:
                merged[key] = _convert(key, value, "the command line")

        logger.debug(f"{command} settings: {merged}")
        return cls(command, merged)

    def get(self, key: str, default: Any = None) -> Any:
        return self.values.get(key, default)

    @property
    def seed(self) -> int:
        return self.get("seed", 0)

    @property
    def output_dir(self) -> Path:
        out = self.get("out")
        return Path(out) if out else default_output_dir()

    def synth_config(self) -> SynthConfig:
        base = SynthConfig()
        return SynthConfig(
            objects=self.get("objects", base.objects),
            properties=self.get("properties", base.properties),
            mean_plausible=self.get("mean_plausible", base.mean_plausible),
            dim=self.get("dim", base.dim),
            sigma=self.get("sigma", base.sigma),
            slots=self.get("slots", base.slots),
        )

    def dot_config(self) -> DotConfig:
        base = DotConfig()
        size: int | None = self.get("size")
        return DotConfig(
            height=size or base.height,
            width=size or base.width,
            radius=self.get("radius", base.radius),
        )

    def train_config(self) -> TrainConfig:
        base = TrainConfig()
        return TrainConfig(
            learning_rate=self.get("learning_rate", base.learning_rate),
            batch_size=self.get("batch_size", base.batch_size),
            max_epochs=self.get("max_epochs", base.max_epochs),
            patience=self.get("patience", base.patience),
            seed=self.seed,
        )

    def split_spec(self) -> SplitSpec:
        base = SplitSpec()
        try:
            setting = SplitSetting.parse(self.get("setting", base.setting.value))
        except ValueError as e:
            raise ConfigError(str(e)) from e

        return SplitSpec(
            setting=setting,
            fractions=self.get("fractions", base.fractions),
            seed=self.seed,
            exclude_heldout_distractors=self.get("exclude_heldout_distractors", False),
        )

    def architecture(self) -> Architecture:
        arch: str | None = self.get("arch")
        if arch is None:
            raise ConfigError(f"{self.command} needs an architecture (--arch).")

        try:
            return Architecture.parse(arch)
        except ValueError as e:
            raise ConfigError(str(e)) from e

    def model_spec(
        self,
        architecture: Architecture,
        *,
        vocabulary: int = 0,
        d_visual: int = 32,
        slots: int = 16,
        image_shape: tuple[int, int] = (64, 64),
    ) -> ModelSpec:
        """Build the model spec for data of the given shape, applying any size overrides."""
        base = ModelSpec(Architecture.SAN)
        return ModelSpec(
            architecture=architecture,
            vocabulary=vocabulary,
            d_visual=d_visual,
            slots=slots,
            d_embed=self.get("d_embed", base.d_embed),
            d_hidden=self.get("d_hidden", base.d_hidden),
            d_mem=self.get("d_mem", base.d_mem),
            stacks=self.get("stacks", base.stacks),
            qmn_softmax_s2=self.get("qmn_softmax_s2", base.qmn_softmax_s2),
            image_height=image_shape[0],
            image_width=image_shape[1],
            filters=self.get("filters", base.filters),
            receptive_field=self.get("receptive_field", base.receptive_field),
            stride=self.get("stride", base.stride),
            seed=self.seed,
        )

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {"command": self.command}
        for key, value in sorted(self.values.items()):
            if key != "out":
                data[key] = list(value) if isinstance(value, tuple) else value

        return data
