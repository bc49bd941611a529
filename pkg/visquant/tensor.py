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
from collections.abc import Callable, Iterable, Sequence
from typing import TypeAlias

import numpy as np
import numpy.typing as npt
from scipy.special import expit, logsumexp

from .exceptions import DimensionError, GradientCheckError, NonFiniteError

__all__ = (
    "Tensor",
    "Node",
    "EPSILON",
    "backward",
    "matmul",
    "add",
    "sub",
    "mul",
    "elementwise",
    "tanh",
    "sigmoid",
    "concat",
    "stack",
    "reduce_sum",
    "scale",
    "softmax",
    "cosine",
    "row_cosine",
    "cross_entropy",
    "slice_",
    "index",
    "add_rowwise",
    "scale_rows",
    "conv2d",
    "mean_pool",
    "grad_check",
)


logger: logging.Logger = logging.getLogger(__name__)


Tensor: TypeAlias = npt.NDArray[np.float64]
GradientRule: TypeAlias = Callable[[Tensor], Tensor]

EPSILON: float = 1e-8


class Node:
    """A dense 64-bit tensor participating in a reverse-mode differentiation graph.

    Nodes are created either as leaves, with :meth:`parameter` or :meth:`constant`, or as the result of one of the
    operations in this module. Operation results remember their parents together with the local derivative rule
    used to push gradients back during :func:`backward`.

    .. container:: operations

        .. describe:: repr(node)

            The official string representation of this Node.

    Attributes
    ----------
    value: numpy.ndarray
        The value of this node. Operations never modify it in place.
    requires_grad: bool
        Whether gradients are accumulated into this node.
    op: str
        The name of the operation that produced this node, or ``"leaf"``.
    """

    __slots__ = ("value", "requires_grad", "op", "name", "_grad", "_parents")

    def __init__(
        self,
        value: npt.ArrayLike,
        *,
        requires_grad: bool = False,
        op: str = "leaf",
        name: str | None = None,
        parents: Sequence[tuple[Node, GradientRule]] = (),
    ) -> None:
        self.value: Tensor = np.asarray(value, dtype=np.float64)
        self.requires_grad: bool = requires_grad
        self.op: str = op
        self.name: str | None = name

        self._grad: Tensor | None = None
        self._parents: tuple[tuple[Node, GradientRule], ...] = tuple(parents)

    def __repr__(self) -> str:
        label: str = f", name={self.name}" if self.name else ""
        return f"Node(op={self.op}, shape={self.shape}, requires_grad={self.requires_grad}{label})"

    @classmethod
    def parameter(cls, value: npt.ArrayLike, *, name: str | None = None) -> Node:
        """Create a leaf node which accumulates gradients."""
        return cls(np.array(value, dtype=np.float64), requires_grad=True, name=name)

    @classmethod
    def constant(cls, value: npt.ArrayLike) -> Node:
        """Create a leaf node which never receives gradients. Used for model inputs."""
        return cls(value, requires_grad=False)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.value.shape)

    @property
    def grad(self) -> Tensor:
        """The accumulated gradient. Lazily zero and always the same shape as :attr:`value`."""
        if self._grad is None:
            return np.zeros_like(self.value)

        return self._grad

    @property
    def parents(self) -> tuple[Node, ...]:
        return tuple(p for p, _ in self._parents)

    def zero_grad(self) -> None:
        self._grad = None

    def item(self) -> float:
        return float(self.value)

    def backward(self, seed: Tensor | None = None) -> None:
        backward(self, seed)

    def _accumulate(self, gradient: Tensor) -> None:
        if self._grad is None:
            self._grad = np.array(gradient, dtype=np.float64).reshape(self.value.shape)
        else:
            self._grad = self._grad + gradient


def _as_node(value: Node | npt.ArrayLike) -> Node:
    if isinstance(value, Node):
        return value

    return Node.constant(value)


def _result(op: str, value: npt.ArrayLike, parents: Iterable[tuple[Node, GradientRule]]) -> Node:
    data: Tensor = np.asarray(value, dtype=np.float64)

    if not np.all(np.isfinite(data)):
        raise NonFiniteError(op=op)

    tracked = [(node, rule) for node, rule in parents if node.requires_grad]
    return Node(data, requires_grad=bool(tracked), op=op, parents=tracked)


def backward(root: Node, seed: Tensor | None = None) -> None:
    """Run the reverse sweep from ``root``, accumulating gradients into every node that requires them.

    Parameters
    ----------
    root: :class:`Node`
        The node to differentiate. Usually a scalar loss.
    seed: numpy.ndarray | None
        The upstream gradient of ``root``. Defaults to ones, which for a scalar root yields plain derivatives.
    """
    if not root.requires_grad:
        return

    order: list[Node] = []
    visited: set[int] = set()
    stack: list[tuple[Node, bool]] = [(root, False)]

    while stack:
        node, expanded = stack.pop()

        if expanded:
            order.append(node)
            continue

        if id(node) in visited:
            continue

        visited.add(id(node))
        stack.append((node, True))

        for parent, _ in node._parents:
            if id(parent) not in visited:
                stack.append((parent, False))

    root._accumulate(np.ones_like(root.value) if seed is None else np.asarray(seed, dtype=np.float64))

    for node in reversed(order):
        if node._grad is None:
            continue

        for parent, rule in node._parents:
            parent._accumulate(rule(node._grad))


def matmul(a: Node, b: Node) -> Node:
    """Matrix product. One-dimensional operands are treated as a row (left) or column (right) vector.

    Raises
    ------
    DimensionError
        The inner dimensions do not agree, or an operand is not one or two dimensional.
    """
    av, bv = a.value, b.value

    if av.ndim not in (1, 2) or bv.ndim not in (1, 2) or av.shape[-1] != bv.shape[0]:
        raise DimensionError(op="matmul", shapes=(a.shape, b.shape))

    a2: Tensor = av if av.ndim == 2 else av[None, :]
    b2: Tensor = bv if bv.ndim == 2 else bv[:, None]
    out_shape: tuple[int, int] = (a2.shape[0], b2.shape[1])

    def grad_a(g: Tensor) -> Tensor:
        return (g.reshape(out_shape) @ b2.T).reshape(av.shape)

    def grad_b(g: Tensor) -> Tensor:
        return (a2.T @ g.reshape(out_shape)).reshape(bv.shape)

    return _result("matmul", av @ bv, ((a, grad_a), (b, grad_b)))


def _reduce_to(gradient: Tensor, shape: tuple[int, ...]) -> Tensor:
    if gradient.shape == shape:
        return gradient

    return np.asarray(gradient.sum()).reshape(shape)


def elementwise(a: Node | npt.ArrayLike, b: Node | npt.ArrayLike, op: str) -> Node:
    """Elementwise ``add``, ``sub`` or ``mul``.

    Operands must share a shape. The only broadcast allowed is between a tensor and a scalar (shape ``()``).
    """
    left, right = _as_node(a), _as_node(b)

    if left.shape != right.shape and left.value.ndim != 0 and right.value.ndim != 0:
        raise DimensionError(op=op, shapes=(left.shape, right.shape))

    lv, rv = left.value, right.value

    if op == "add":
        value = lv + rv
        rules = ((left, lambda g: _reduce_to(g, lv.shape)), (right, lambda g: _reduce_to(g, rv.shape)))
    elif op == "sub":
        value = lv - rv
        rules = ((left, lambda g: _reduce_to(g, lv.shape)), (right, lambda g: _reduce_to(-g, rv.shape)))
    elif op == "mul":
        value = lv * rv
        rules = ((left, lambda g: _reduce_to(g * rv, lv.shape)), (right, lambda g: _reduce_to(g * lv, rv.shape)))
    else:
        raise ValueError(f'Unknown elementwise operation "{op}". Expected add, sub or mul.')

    return _result(op, value, rules)


def add(a: Node | npt.ArrayLike, b: Node | npt.ArrayLike) -> Node:
    return elementwise(a, b, "add")


def sub(a: Node | npt.ArrayLike, b: Node | npt.ArrayLike) -> Node:
    return elementwise(a, b, "sub")


def mul(a: Node | npt.ArrayLike, b: Node | npt.ArrayLike) -> Node:
    return elementwise(a, b, "mul")


def tanh(a: Node) -> Node:
    y: Tensor = np.tanh(a.value)
    return _result("tanh", y, ((a, lambda g: g * (1.0 - y * y)),))


def sigmoid(a: Node) -> Node:
    y: Tensor = expit(a.value)
    return _result("sigmoid", y, ((a, lambda g: g * y * (1.0 - y)),))


def concat(nodes: Sequence[Node], axis: int = 0) -> Node:
    """Concatenate along ``axis``. All other dimensions must agree."""
    if not nodes:
        raise DimensionError("concat requires at least one operand.", op="concat", shapes=())

    try:
        value: Tensor = np.concatenate([n.value for n in nodes], axis=axis)
    except ValueError:
        raise DimensionError(op="concat", shapes=[n.shape for n in nodes]) from None

    bounds: Tensor = np.cumsum([0] + [n.value.shape[axis] for n in nodes])

    def rule(start: int, stop: int) -> GradientRule:
        return lambda g: np.take(g, np.arange(start, stop), axis=axis)

    return _result("concat", value, [(n, rule(int(bounds[i]), int(bounds[i + 1]))) for i, n in enumerate(nodes)])


def stack(nodes: Sequence[Node]) -> Node:
    """Stack equally shaped operands along a new first axis."""
    if not nodes or len({n.shape for n in nodes}) != 1:
        raise DimensionError(op="stack", shapes=[n.shape for n in nodes])

    def rule(i: int) -> GradientRule:
        return lambda g: g[i]

    return _result("stack", np.stack([n.value for n in nodes]), [(n, rule(i)) for i, n in enumerate(nodes)])


def reduce_sum(a: Node, axis: int | None = None) -> Node:
    shape: tuple[int, ...] = a.shape

    if axis is not None and not -len(shape) <= axis < len(shape):
        raise DimensionError(op="sum", shapes=(shape,))

    def rule(g: Tensor) -> Tensor:
        if axis is None:
            return np.full(shape, float(g))

        return np.broadcast_to(np.expand_dims(g, axis), shape).copy()

    return _result("sum", np.sum(a.value, axis=axis), ((a, rule),))


def scale(a: Node, s: float) -> Node:
    factor: float = float(s)
    return _result("scale", a.value * factor, ((a, lambda g: g * factor),))


def softmax(a: Node) -> Node:
    """Softmax over a vector, computed with max-subtraction.

    Raises
    ------
    DimensionError
        The operand is not a non-empty vector.
    """
    if a.value.ndim != 1 or a.value.size == 0:
        raise DimensionError(op="softmax", shapes=(a.shape,))

    shifted: Tensor = np.exp(a.value - a.value.max())
    y: Tensor = shifted / shifted.sum()

    return _result("softmax", y, ((a, lambda g: y * (g - np.dot(g, y))),))


def cosine(a: Node, b: Node) -> Node:
    """Cosine similarity ``(a . b) / (|a| |b| + EPSILON)``. Zero vectors yield 0."""
    if a.value.ndim != 1 or a.shape != b.shape or a.value.size == 0:
        raise DimensionError(op="cosine", shapes=(a.shape, b.shape))

    av, bv = a.value, b.value
    na, nb = float(np.linalg.norm(av)), float(np.linalg.norm(bv))
    dot: float = float(np.dot(av, bv))
    den: float = na * nb + EPSILON

    unit_a: Tensor = av / na if na > 0 else np.zeros_like(av)
    unit_b: Tensor = bv / nb if nb > 0 else np.zeros_like(bv)

    def grad_a(g: Tensor) -> Tensor:
        return float(g) * (bv / den - dot * nb * unit_a / den**2)

    def grad_b(g: Tensor) -> Tensor:
        return float(g) * (av / den - dot * na * unit_b / den**2)

    return _result("cosine", dot / den, ((a, grad_a), (b, grad_b)))


def row_cosine(rows: Node, b: Node) -> Node:
    """Cosine similarity of every row of ``rows`` against the vector ``b``, with the same guard as :func:`cosine`."""
    if rows.value.ndim != 2 or b.value.ndim != 1 or rows.shape[1] != b.shape[0]:
        raise DimensionError(op="row_cosine", shapes=(rows.shape, b.shape))

    av, bv = rows.value, b.value
    na: Tensor = np.linalg.norm(av, axis=1)
    nb: float = float(np.linalg.norm(bv))
    dots: Tensor = av @ bv
    den: Tensor = na * nb + EPSILON

    safe: Tensor = np.where(na > 0, na, 1.0)
    unit_rows: Tensor = np.where((na > 0)[:, None], av / safe[:, None], 0.0)
    unit_b: Tensor = bv / nb if nb > 0 else np.zeros_like(bv)

    def grad_rows(g: Tensor) -> Tensor:
        return (g / den)[:, None] * bv[None, :] - (g * dots * nb / den**2)[:, None] * unit_rows

    def grad_b(g: Tensor) -> Tensor:
        return (g / den) @ av - float(np.sum(g * dots * na / den**2)) * unit_b

    return _result("row_cosine", dots / den, ((rows, grad_rows), (b, grad_b)))


def cross_entropy(logits: Node, label: int) -> Node:
    """Negative log-likelihood of ``label`` under ``softmax(logits)``.

    Raises
    ------
    DimensionError
        ``logits`` is not a vector of five values.
    """
    if logits.shape != (5,):
        raise DimensionError(op="cross_entropy", shapes=(logits.shape,))

    z: Tensor = logits.value
    lse: float = float(logsumexp(z))
    probabilities: Tensor = np.exp(z - lse)
    target: int = int(label)

    def rule(g: Tensor) -> Tensor:
        local: Tensor = probabilities.copy()
        local[target] -= 1.0
        return float(g) * local

    return _result("cross_entropy", max(lse - float(z[target]), 0.0), ((logits, rule),))


def slice_(a: Node, start: int, stop: int) -> Node:
    """Select ``a[start:stop]`` along the first axis."""
    length: int = a.shape[0] if a.value.ndim else 0

    if not 0 <= start < stop <= length:
        raise DimensionError(f"Invalid slice [{start}:{stop}] for shape {a.shape}.", op="slice", shapes=(a.shape,))

    def rule(g: Tensor) -> Tensor:
        out: Tensor = np.zeros_like(a.value)
        out[start:stop] = g
        return out

    return _result("slice", a.value[start:stop], ((a, rule),))


def index(a: Node, i: int) -> Node:
    """Select ``a[i]`` along the first axis. For a matrix this is row ``i``."""
    if a.value.ndim == 0 or not 0 <= i < a.shape[0]:
        raise DimensionError(f"Invalid index {i} for shape {a.shape}.", op="index", shapes=(a.shape,))

    def rule(g: Tensor) -> Tensor:
        out: Tensor = np.zeros_like(a.value)
        out[i] = g
        return out

    return _result("index", a.value[i], ((a, rule),))


def add_rowwise(rows: Node, b: Node) -> Node:
    """Add the vector ``b`` to every row of ``rows``."""
    if rows.value.ndim != 2 or b.value.ndim != 1 or rows.shape[1] != b.shape[0]:
        raise DimensionError(op="add_rowwise", shapes=(rows.shape, b.shape))

    return _result("add_rowwise", rows.value + b.value, ((rows, lambda g: g), (b, lambda g: g.sum(axis=0))))


def scale_rows(rows: Node, weights: Node) -> Node:
    """Multiply row ``i`` of ``rows`` by ``weights[i]``."""
    if rows.value.ndim != 2 or weights.value.ndim != 1 or rows.shape[0] != weights.shape[0]:
        raise DimensionError(op="scale_rows", shapes=(rows.shape, weights.shape))

    rv, wv = rows.value, weights.value

    return _result(
        "scale_rows",
        rv * wv[:, None],
        ((rows, lambda g: g * wv[:, None]), (weights, lambda g: np.sum(g * rv, axis=1))),
    )


def conv2d(image: Node, kernels: Node, bias: Node, stride: int = 1) -> Node:
    """Valid two-dimensional cross-correlation of a single-channel image with a bank of square filters.

    Parameters
    ----------
    image: :class:`Node`
        The ``H x W`` input.
    kernels: :class:`Node`
        The ``F x R x R`` filters.
    bias: :class:`Node`
        One bias per filter, shape ``F``.
    stride: int
        The step between receptive fields in both directions.

    Returns
    -------
    :class:`Node`
        The ``F x oh x ow`` response map where ``oh = (H - R) // stride + 1``.
    """
    iv, kv, bv = image.value, kernels.value, bias.value

    if (
        iv.ndim != 2
        or kv.ndim != 3
        or kv.shape[1] != kv.shape[2]
        or bv.shape != (kv.shape[0],)
        or kv.shape[1] > min(iv.shape)
        or stride < 1
    ):
        raise DimensionError(op="conv2d", shapes=(image.shape, kernels.shape, bias.shape))

    size: int = kv.shape[1]
    windows: Tensor = np.lib.stride_tricks.sliding_window_view(iv, (size, size))[::stride, ::stride]
    oh, ow = windows.shape[0], windows.shape[1]

    value: Tensor = np.einsum("ijuv,fuv->fij", windows, kv) + bv[:, None, None]

    def grad_image(g: Tensor) -> Tensor:
        out: Tensor = np.zeros_like(iv)
        span_h, span_w = stride * (oh - 1) + 1, stride * (ow - 1) + 1

        for u in range(size):
            for v in range(size):
                out[u : u + span_h : stride, v : v + span_w : stride] += np.einsum("fij,f->ij", g, kv[:, u, v])

        return out

    return _result(
        "conv2d",
        value,
        (
            (image, grad_image),
            (kernels, lambda g: np.einsum("fij,ijuv->fuv", g, windows)),
            (bias, lambda g: g.sum(axis=(1, 2))),
        ),
    )


def mean_pool(a: Node) -> Node:
    """Spatial average of an ``F x oh x ow`` map, giving one value per filter."""
    if a.value.ndim != 3:
        raise DimensionError(op="mean_pool", shapes=(a.shape,))

    shape: tuple[int, ...] = a.shape
    area: int = shape[1] * shape[2]

    def rule(g: Tensor) -> Tensor:
        return np.broadcast_to((g / area)[:, None, None], shape).copy()

    return _result("mean_pool", a.value.mean(axis=(1, 2)), ((a, rule),))


def grad_check(
    f: Callable[[], Node],
    params: Sequence[Node],
    step: float = 1e-3,
    *,
    max_coordinates: int | None = None,
    seed: int = 0,
) -> float:
    """Compare backward-pass gradients with central finite differences.

    Parameters
    ----------
    f: Callable[[], :class:`Node`]
        A function rebuilding the scalar objective from the current values of ``params``.
    params: Sequence[:class:`Node`]
        The parameters to check. Their values are perturbed temporarily and always restored.
    step: float
        The finite-difference step. Defaults to ``1e-3``.
    max_coordinates: int | None
        If given, at most this many coordinates per parameter are checked, chosen at random.
    seed: int
        Seed used to choose coordinates when ``max_coordinates`` is set.

    Returns
    -------
    float
        The maximum over checked coordinates of ``|g_ad - g_fd| / max(1, |g_ad|, |g_fd|)``.

    Raises
    ------
    GradientCheckError
        The objective was not finite.
    """
    rng: np.random.Generator = np.random.default_rng(seed)

    def evaluate() -> Node:
        try:
            out: Node = f()
        except NonFiniteError as e:
            raise GradientCheckError(f"Objective is not finite during gradient check: {e}") from e

        if out.value.size != 1:
            raise GradientCheckError(f"Gradient check requires a scalar objective, got shape {out.shape}.")

        return out

    for p in params:
        p.zero_grad()

    backward(evaluate())
    analytic: list[Tensor] = [p.grad.copy() for p in params]
    worst: float = 0.0

    for p, ga in zip(params, analytic):
        original: Tensor = p.value
        coordinates: list[int] = list(range(original.size))

        if max_coordinates is not None and len(coordinates) > max_coordinates:
            coordinates = sorted(rng.choice(original.size, size=max_coordinates, replace=False).tolist())

        try:
            for flat in coordinates:
                bumped: Tensor = original.copy()
                bumped.flat[flat] += step
                p.value = bumped
                plus: float = evaluate().item()

                bumped = original.copy()
                bumped.flat[flat] -= step
                p.value = bumped
                minus: float = evaluate().item()

                fd: float = (plus - minus) / (2.0 * step)
                ad: float = float(ga.flat[flat])
                worst = max(worst, abs(ad - fd) / max(1.0, abs(ad), abs(fd)))
        finally:
            p.value = original

    logger.debug(f"Gradient check over {len(params)} parameters finished with max relative error {worst:.3e}")
    return worst
