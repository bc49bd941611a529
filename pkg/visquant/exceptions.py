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

from collections.abc import Sequence
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .enums import QuantifierLabel


__all__ = (
    "VisquantException",
    "DimensionError",
    "NonFiniteError",
    "GradientCheckError",
    "UndefinedRestrictorError",
    "VocabularyError",
    "GenerationError",
    "SplitError",
    "LeakageError",
    "TrainingDivergedError",
    "RenderError",
    "CheckpointError",
    "ConfigError",
)


class VisquantException(Exception):
    """Base visquant Exception class.

    All visquant exceptions derive from this exception.
    """


class DimensionError(VisquantException):
    """Exception raised when the operands of a tensor operation have incompatible shapes.

    Attributes
    ----------
    op: str
        The name of the operation that was attempted.
    shapes: tuple[tuple[int, ...], ...]
        The shapes of the operands received.
    """

    def __init__(self, msg: str | None = None, /, *, op: str, shapes: Sequence[tuple[int, ...]]) -> None:
        self.op: str = op
        self.shapes: tuple[tuple[int, ...], ...] = tuple(tuple(s) for s in shapes)

        if not msg:
            msg = f"Incompatible operand shapes for {op}: {', '.join(str(s) for s in self.shapes)}"

        super().__init__(msg)


class NonFiniteError(VisquantException):
    """Exception raised when a tensor operation produces NaN or infinite values.

    Attributes
    ----------
    op: str
        The name of the operation which produced the non-finite value.
    """

    def __init__(self, msg: str | None = None, /, *, op: str) -> None:
        self.op: str = op

        if not msg:
            msg = f"Operation {op} produced a non-finite value."

        super().__init__(msg)


class GradientCheckError(VisquantException):
    """Exception raised when the objective of a gradient check is not finite."""


class UndefinedRestrictorError(VisquantException):
    """Exception raised when a quantifier is requested for an empty restrictor set."""


class VocabularyError(VisquantException):
    """Exception raised when a query refers to an id outside of the model vocabulary."""


class GenerationError(VisquantException):
    """Exception raised when a datapoint can not be generated.

    Attributes
    ----------
    label: :class:`~visquant.QuantifierLabel` | None
        The label which could not be reached. Could be ``None`` if the failure is unrelated to the label.
    slots: int | None
        The scenario size used for generation. Could be ``None``.
    """

    def __init__(
        self, msg: str | None = None, /, *, label: QuantifierLabel | None = None, slots: int | None = None
    ) -> None:
        self.label = label
        self.slots = slots

        if not msg:
            msg = f"Unable to generate a datapoint: label={label}, slots={slots}"

        super().__init__(msg)


class SplitError(VisquantException):
    """Exception raised when a corpus can not be partitioned for the requested setting."""


class LeakageError(SplitError):
    """Exception raised when a generated split violates one of its leakage checks.

    Attributes
    ----------
    overlap: list
        A sample of the offending keys.
    """

    def __init__(self, msg: str, /, *, overlap: Sequence[object] = ()) -> None:
        self.overlap: list[object] = list(overlap)[:10]
        super().__init__(msg)


class TrainingDivergedError(VisquantException):
    """Exception raised when the training loss becomes non-finite.

    Attributes
    ----------
    epoch: int
        The epoch during which training diverged.
    batch: int
        The index of the offending minibatch within the epoch.
    loss: float
        The last loss value observed. Usually ``nan`` or ``inf``.
    """

    def __init__(self, msg: str | None = None, /, *, epoch: int, batch: int, loss: float) -> None:
        self.epoch = epoch
        self.batch = batch
        self.loss = loss

        if not msg:
            msg = (
                f"Training diverged: epoch={epoch}, batch={batch}, loss={loss}. "
                "Consider lowering the learning rate."
            )

        super().__init__(msg)


class RenderError(VisquantException):
    """Exception raised when dots can not be placed in the frame without overlapping.

    Attributes
    ----------
    count: int
        The number of dots that were requested.
    attempts: int
        The number of placement attempts made before giving up.
    """

    def __init__(self, msg: str | None = None, /, *, count: int, attempts: int) -> None:
        self.count = count
        self.attempts = attempts

        if not msg:
            msg = f"Unable to place {count} non-overlapping dots after {attempts} attempts."

        super().__init__(msg)


class CheckpointError(VisquantException):
    """Exception raised when a checkpoint or binary corpus file is malformed."""


class ConfigError(VisquantException):
    """Exception raised when a configuration value or file is invalid."""
