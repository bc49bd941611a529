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
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any, ClassVar, TypeVar

import numpy as np
import numpy.typing as npt

from ..checkpoint import load_checkpoint, save_checkpoint
from ..enums import Architecture, QuantifierLabel
from ..exceptions import CheckpointError, ConfigError, DimensionError, VocabularyError
from ..samples import Sample
from ..tensor import Node, cross_entropy
from ..utils import Provenance

__all__ = (
    "ModelSpec",
    "Model",
    "register",
    "build_model",
    "load_model",
    "glorot_uniform",
)


logger: logging.Logger = logging.getLogger(__name__)


M = TypeVar("M", bound="type[Model]")


@dataclass(frozen=True)
class ModelSpec:
    """Architecture and hyperparameters of a classifier.

    Attributes
    ----------
    architecture: :class:`~visquant.Architecture`
        Which classifier to build.
    vocabulary: int
        Size of the shared object and property vocabulary. Required by the bag-of-words models.
    d_visual: int
        Dimension of slot vectors and of the fixed word vectors. Defaults to ``32``.
    slots: int
        Scenario size ``S``. Defaults to ``16``.
    d_embed: int
        Size of the learned bag-of-words word feature. Defaults to ``32``.
    d_hidden: int
        Hidden size of the LSTMs and of the attention layers. Defaults to ``32``.
    d_mem: int
        Size of the memory cells of the quantification memory network. Defaults to ``32``.
    stacks: int
        Number of attention passes. Defaults to ``2``.
    qmn_softmax_s2: bool
        Apply a softmax to the scope similarities of the memory network. Defaults to ``False``.
    image_height: int
        Height of dot images. Defaults to ``64``.
    image_width: int
        Width of dot images. Defaults to ``64``.
    filters: int
        Number of convolution filters of the dot classifier. Defaults to ``8``.
    receptive_field: int
        Side of each square filter. Defaults to ``5``.
    stride: int
        Convolution stride. Defaults to ``2``.
    seed: int
        Seed for parameter initialization.
    """

    architecture: Architecture
    vocabulary: int = 0
    d_visual: int = 32
    slots: int = 16
    d_embed: int = 32
    d_hidden: int = 32
    d_mem: int = 32
    stacks: int = 2
    qmn_softmax_s2: bool = False
    image_height: int = 64
    image_width: int = 64
    filters: int = 8
    receptive_field: int = 5
    stride: int = 2
    seed: int = 0

    def __post_init__(self) -> None:
        sizes = (
            self.d_visual,
            self.slots,
            self.d_embed,
            self.d_hidden,
            self.d_mem,
            self.image_height,
            self.image_width,
            self.filters,
            self.receptive_field,
            self.stride,
        )

        if any(s < 1 for s in sizes):
            raise ConfigError(f"Model dimensions must be positive: {self}")

        if self.stacks < 1:
            raise ConfigError(f"At least one attention stack is required, got {self.stacks}.")

        if self.architecture in (Architecture.BOW, Architecture.CNN_BOW) and self.vocabulary < 2:
            raise ConfigError(f"{self.architecture.value} requires the vocabulary size, got {self.vocabulary}.")

        if self.receptive_field > min(self.image_height, self.image_width):
            raise ConfigError("The receptive field does not fit the image.")

    def to_dict(self) -> dict[str, Any]:
        data = dataclasses.asdict(self)
        data["architecture"] = self.architecture.value
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> ModelSpec:
        values = dict(data)
        values["architecture"] = Architecture.parse(values["architecture"])

        try:
            return cls(**values)
        except TypeError as e:
            raise ConfigError(f"Invalid model spec: {e}") from e


def glorot_uniform(
    rng: np.random.Generator, shape: tuple[int, ...], fan_in: int, fan_out: int
) -> npt.NDArray[np.float64]:
    """Uniform draw in ``(-a, a)`` with ``a = sqrt(6 / (fan_in + fan_out))``."""
    limit: float = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Model:
    """Base class of every classifier: a set of named parameters and a forward pass to five logits.

    Subclasses declare their parameters in ``__init__`` through :meth:`parameter` and implement :meth:`forward` and
    :meth:`expected_parameter_count`.

    .. container:: operations

        .. describe:: repr(model)

            The official string representation of this Model.

    Attributes
    ----------
    spec: :class:`ModelSpec`
        The spec this model was built from.
    """

    architecture: ClassVar[Architecture]

    def __init__(self, spec: ModelSpec) -> None:
        self.spec = spec
        self._params: dict[str, Node] = {}
        self._rng: np.random.Generator = np.random.default_rng(spec.seed)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(parameters={self.parameter_count()})"

    def parameter(
        self,
        name: str,
        shape: tuple[int, ...],
        *,
        fan_in: int | None = None,
        fan_out: int | None = None,
        fill: float = 0.0,
    ) -> Node:
        """Register a parameter. Glorot-initialized when fans are given, filled with ``fill`` otherwise."""
        if name in self._params:
            raise ValueError(f'Parameter "{name}" is already registered.')

        if fan_in is None or fan_out is None:
            value = np.full(shape, float(fill))
        else:
            value = glorot_uniform(self._rng, shape, fan_in, fan_out)

        node = Node.parameter(value, name=name)
        self._params[name] = node
        return node

    @property
    def params(self) -> dict[str, Node]:
        """Parameters by name, in registration order."""
        return dict(self._params)

    def parameter_count(self) -> int:
        return sum(p.value.size for p in self._params.values())

    def expected_parameter_count(self) -> int:
        """The closed-form parameter count for :attr:`spec`."""
        raise NotImplementedError

    def zero_grad(self) -> None:
        for p in self._params.values():
            p.zero_grad()

    def forward(self, sample: Sample) -> Node:
        """Compute the five logits for ``sample``."""
        raise NotImplementedError

    def loss(self, sample: Sample) -> Node:
        """Cross-entropy of the sample's label under :meth:`forward`."""
        return cross_entropy(self.forward(sample), sample.label)

    def logits(self, sample: Sample) -> npt.NDArray[np.float64]:
        return self.forward(sample).value

    def predict(self, samples: Sequence[Sample]) -> list[QuantifierLabel]:
        """The argmax label of every sample. Ties go to the lower ordinal."""
        return [QuantifierLabel(int(np.argmax(self.logits(s)))) for s in samples]

    def state_dict(self) -> dict[str, npt.NDArray[np.float64]]:
        return {name: p.value.copy() for name, p in self._params.items()}

    def load_state_dict(self, state: Mapping[str, npt.ArrayLike]) -> None:
        """Replace every parameter value.

        Raises
        ------
        CheckpointError
            A parameter is missing, unexpected, or has the wrong shape.
        """
        if set(state) != set(self._params):
            missing = sorted(set(self._params) - set(state))
            extra = sorted(set(state) - set(self._params))
            raise CheckpointError(f"Parameter names do not match: missing={missing}, unexpected={extra}.")

        for name, p in self._params.items():
            value = np.asarray(state[name], dtype=np.float64)

            if value.shape != p.value.shape:
                raise CheckpointError(f'Parameter "{name}" has shape {value.shape}, expected {p.value.shape}.')

            p.value = value.copy()
            p.zero_grad()

    def save(
        self, path: str | Path, *, provenance: Provenance | None = None, extra: Mapping[str, Any] | None = None
    ) -> Path:
        metadata: dict[str, Any] = {"architecture": self.spec.architecture.value, "spec": self.spec.to_dict()}

        if provenance is not None:
            metadata["provenance"] = dict(provenance)

        if extra:
            metadata.update(extra)

        target = save_checkpoint(path, self.state_dict(), metadata)
        logger.info(f"Saved {self!r} to {target}")
        return target

    def _vocabulary_id(self, word: int) -> int:
        if not 0 <= word < self.spec.vocabulary:
            raise VocabularyError(f"Vocabulary id {word} is outside of a vocabulary of {self.spec.vocabulary} words.")

        return word

    def _scenario(self, sample: Sample) -> npt.NDArray[np.float64]:
        if sample.visual is None:
            raise DimensionError(f"{self.spec.architecture.value} requires a scenario.", op="forward", shapes=())

        visual = sample.visual
        if visual.ndim != 2 or visual.shape[1] != self.spec.d_visual or visual.shape[0] > self.spec.slots:
            raise DimensionError(op="forward", shapes=(visual.shape, (self.spec.slots, self.spec.d_visual)))

        return visual

    def _words(self, sample: Sample) -> tuple[Node, Node]:
        if sample.restrictor_vector is None or sample.scope_vector is None:
            raise DimensionError("The sample carries no query vectors.", op="forward", shapes=())

        for vector in (sample.restrictor_vector, sample.scope_vector):
            if vector.shape != (self.spec.d_visual,):
                raise DimensionError(op="forward", shapes=(vector.shape, (self.spec.d_visual,)))

        return Node.constant(sample.restrictor_vector), Node.constant(sample.scope_vector)


_REGISTRY: dict[Architecture, type[Model]] = {}


def register(architecture: Architecture) -> Callable[[M], M]:
    def decorator(cls: M) -> M:
        cls.architecture = architecture
        _REGISTRY[architecture] = cls
        return cls

    return decorator


def build_model(spec: ModelSpec) -> Model:
    """Build a freshly initialized model for ``spec``."""
    try:
        cls = _REGISTRY[spec.architecture]
    except KeyError:
        raise ConfigError(f"No model registered for {spec.architecture.value}.") from None

    model: Model = cls(spec)
    logger.debug(f"Built {model!r} from {spec}")
    return model


def load_model(path: str | Path) -> tuple[Model, dict[str, Any]]:
    """Rebuild a model from a checkpoint written by :meth:`Model.save`.

    Returns
    -------
    tuple[:class:`Model`, dict[str, Any]]
        The model and the checkpoint metadata.

    Raises
    ------
    CheckpointError
        The checkpoint is malformed or its parameters do not match its architecture.
    """
    tensors, metadata = load_checkpoint(path)

    try:
        spec = ModelSpec.from_dict(metadata["spec"])
    except (KeyError, ValueError, ConfigError) as e:
        raise CheckpointError(f"Checkpoint {path} carries no valid model spec: {e}") from e

    model = build_model(spec)
    model.load_state_dict(tensors)
    return model, metadata
