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
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np

from .exceptions import ConfigError, NonFiniteError, TrainingDivergedError
from .models import Model, ModelSpec, build_model
from .samples import Sample
from .tensor import backward, cross_entropy

if TYPE_CHECKING:
    from .types.reports import HistoryPayload


__all__ = ("TrainConfig", "EpochRecord", "History", "train", "accuracy")


logger: logging.Logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    """Optimization settings.

    Attributes
    ----------
    learning_rate: float
        Step size of plain stochastic gradient descent. Defaults to ``0.05``. Zero leaves parameters unchanged.
    batch_size: int
        Datapoints per update. The update follows the mean loss of the batch. Defaults to ``32``.
    max_epochs: int
        Upper bound on passes over the training set. Defaults to ``100``.
    patience: int
        Epochs without a new best validation accuracy before stopping. Defaults to ``10``.
    seed: int
        Seed for the per-epoch shuffles.
    """

    learning_rate: float = 0.05
    batch_size: int = 32
    max_epochs: int = 100
    patience: int = 10
    seed: int = 0

    def __post_init__(self) -> None:
        if self.learning_rate < 0 or not math.isfinite(self.learning_rate):
            raise ConfigError(f"Learning rate must be a finite nonnegative value, got {self.learning_rate}.")

        if self.batch_size < 1 or self.max_epochs < 1 or self.patience < 1:
            raise ConfigError("Batch size, max epochs and patience must be positive.")

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    loss: float
    train_accuracy: float
    val_accuracy: float


@dataclass
class History:
    """What happened during :func:`train`.

    Attributes
    ----------
    epochs: list[:class:`EpochRecord`]
        Mean training loss, training accuracy and validation accuracy per epoch. Training figures are measured
        during the epoch, before each batch update.
    best_epoch: int
        The epoch whose parameters were kept. ``0`` means the initial parameters.
    best_val_accuracy: float
        Validation accuracy of the kept parameters.
    stopped_early: bool
        Whether patience ran out before ``max_epochs``.
    """

    epochs: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    best_val_accuracy: float = 0.0
    stopped_early: bool = False

    def to_payload(self) -> HistoryPayload:
        return {
            "epochs": [
                {
                    "epoch": r.epoch,
                    "loss": r.loss,
                    "train_accuracy": r.train_accuracy,
                    "val_accuracy": r.val_accuracy,
                }
                for r in self.epochs
            ],
            "best_epoch": self.best_epoch,
            "best_val_accuracy": self.best_val_accuracy,
            "stopped_early": self.stopped_early,
        }

    def plot_series(self) -> dict[str, list[tuple[float, float]]]:
        return {
            "loss": [(r.epoch, r.loss) for r in self.epochs],
            "train_accuracy": [(r.epoch, r.train_accuracy) for r in self.epochs],
            "val_accuracy": [(r.epoch, r.val_accuracy) for r in self.epochs],
        }


def accuracy(model: Model, samples: Sequence[Sample]) -> float:
    if not samples:
        return 0.0

    predictions = model.predict(samples)
    return sum(p is s.label for p, s in zip(predictions, samples)) / len(samples)


def train(
    spec: ModelSpec | Model, train_set: Sequence[Sample], val_set: Sequence[Sample], config: TrainConfig = TrainConfig()
) -> tuple[Model, History]:
    """Fit a model with minibatch stochastic gradient descent on the mean cross-entropy.

    After every epoch the model is scored on ``val_set``; the parameters with the best validation accuracy are kept
    and restored at the end. Training stops once ``patience`` epochs pass without improvement. Given the same inputs
    and seeds, two runs produce identical parameters and history.

    Parameters
    ----------
    spec: :class:`~visquant.ModelSpec` | :class:`~visquant.Model`
        The model to build, or an already built model to continue training.
    train_set: Sequence[:class:`~visquant.Sample`]
        The training samples.
    val_set: Sequence[:class:`~visquant.Sample`]
        The validation samples used for model selection.
    config: :class:`TrainConfig`
        Optimization settings.

    Raises
    ------
    ConfigError
        A set is empty.
    TrainingDivergedError
        The loss became non-finite.
    """
    if not train_set or not val_set:
        raise ConfigError("Training needs nonempty training and validation sets.")

    model: Model = spec if isinstance(spec, Model) else build_model(spec)
    params = list(model.params.values())
    rng: np.random.Generator = np.random.default_rng(config.seed)

    history = History(best_val_accuracy=accuracy(model, val_set))
    best_state = model.state_dict()
    stale: int = 0

    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(len(train_set))
        total_loss: float = 0.0
        correct: int = 0

        for batch, start in enumerate(range(0, len(order), config.batch_size)):
            members = [train_set[int(i)] for i in order[start : start + config.batch_size]]
            weight = np.asarray(1.0 / len(members))
            model.zero_grad()

            for sample in members:
                try:
                    logits = model.forward(sample)
                    loss = cross_entropy(logits, sample.label)
                except NonFiniteError as e:
                    raise TrainingDivergedError(epoch=epoch, batch=batch, loss=math.nan) from e

                value: float = loss.item()
                if not math.isfinite(value):
                    raise TrainingDivergedError(epoch=epoch, batch=batch, loss=value)

                total_loss += value
                correct += int(np.argmax(logits.value)) == int(sample.label)
                backward(loss, weight)

            if config.learning_rate > 0:
                for p in params:
                    p.value = p.value - config.learning_rate * p.grad

                if not all(np.all(np.isfinite(p.value)) for p in params):
                    raise TrainingDivergedError(epoch=epoch, batch=batch, loss=total_loss)

        record = EpochRecord(
            epoch=epoch,
            loss=total_loss / len(train_set),
            train_accuracy=correct / len(train_set),
            val_accuracy=accuracy(model, val_set),
        )
        history.epochs.append(record)
        logger.debug(
            f"Epoch {epoch}: loss={record.loss:.4f}, train={record.train_accuracy:.3f}, val={record.val_accuracy:.3f}"
        )

        if record.val_accuracy > history.best_val_accuracy:
            history.best_epoch = epoch
            history.best_val_accuracy = record.val_accuracy
            best_state = model.state_dict()
            stale = 0
        else:
            stale += 1

            if stale >= config.patience:
                history.stopped_early = epoch < config.max_epochs
                break

    model.load_state_dict(best_state)
    model.zero_grad()

    logger.info(
        f"Trained {model!r} for {len(history.epochs)} epochs; "
        f"best epoch {history.best_epoch} with validation accuracy {history.best_val_accuracy:.3f}"
    )
    return model, history
