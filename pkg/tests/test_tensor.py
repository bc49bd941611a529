from __future__ import annotations

import math

import numpy as np
import pytest

from visquant import (
    DimensionError,
    GradientCheckError,
    Node,
    NonFiniteError,
    add,
    add_rowwise,
    concat,
    conv2d,
    cosine,
    cross_entropy,
    grad_check,
    index,
    matmul,
    mean_pool,
    mul,
    reduce_sum,
    row_cosine,
    scale,
    scale_rows,
    sigmoid,
    slice_,
    softmax,
    stack,
    sub,
    tanh,
)


def naive_conv(image: np.ndarray, kernels: np.ndarray, bias: np.ndarray, stride: int) -> np.ndarray:
    filters, size, _ = kernels.shape
    oh = (image.shape[0] - size) // stride + 1
    ow = (image.shape[1] - size) // stride + 1
    out = np.zeros((filters, oh, ow))

    for f in range(filters):
        for i in range(oh):
            for j in range(ow):
                total = bias[f]
                for u in range(size):
                    for v in range(size):
                        total += image[i * stride + u, j * stride + v] * kernels[f, u, v]
                out[f, i, j] = total

    return out


class TestMatmul:
    def test_identity(self) -> None:
        m = np.array([[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_array_equal(matmul(Node.constant(np.eye(2)), Node.constant(m)).value, m)

    def test_hand_product(self) -> None:
        out = matmul(Node.constant([[1.0, 2.0]]), Node.constant([[3.0], [4.0]]))
        np.testing.assert_array_equal(out.value, [[11.0]])

    def test_zeros(self, rng: np.random.Generator) -> None:
        out = matmul(Node.constant(np.zeros((2, 3))), Node.constant(rng.normal(size=(3, 4))))
        np.testing.assert_array_equal(out.value, np.zeros((2, 4)))

    def test_shape_mismatch(self) -> None:
        with pytest.raises(DimensionError) as info:
            matmul(Node.constant(np.ones((2, 3))), Node.constant(np.ones((2, 3))))

        assert info.value.op == "matmul"

    def test_associativity(self, rng: np.random.Generator) -> None:
        a, b, c = (Node.constant(rng.normal(size=s)) for s in ((3, 4), (4, 5), (5, 2)))
        left = matmul(matmul(a, b), c).value
        right = matmul(a, matmul(b, c)).value
        np.testing.assert_allclose(left, right, atol=1e-9)

    def test_gradients(self, rng: np.random.Generator) -> None:
        a = Node.parameter(rng.normal(size=(3, 4)))
        b = Node.parameter(rng.normal(size=(4, 2)))
        assert grad_check(lambda: reduce_sum(tanh(matmul(a, b))), [a, b]) <= 1e-4


class TestElementwise:
    def test_add(self) -> None:
        np.testing.assert_array_equal(add(Node.constant([1.0, 2.0]), Node.constant([3.0, 4.0])).value, [4.0, 6.0])

    def test_tanh_zero(self) -> None:
        assert tanh(Node.constant(0.0)).item() == 0.0

    def test_concat(self) -> None:
        out = concat([Node.constant([1.0, 2.0]), Node.constant([3.0])])
        np.testing.assert_array_equal(out.value, [1.0, 2.0, 3.0])

    def test_incompatible(self) -> None:
        with pytest.raises(DimensionError):
            add(Node.constant([1.0, 2.0]), Node.constant([1.0, 2.0, 3.0]))

    def test_scalar_broadcast(self) -> None:
        np.testing.assert_array_equal(mul(Node.constant([1.0, 2.0]), 3.0).value, [3.0, 6.0])

    def test_scale(self) -> None:
        np.testing.assert_array_equal(scale(Node.constant([1.0, -2.0]), 0.5).value, [0.5, -1.0])

    def test_non_finite(self) -> None:
        with pytest.raises(NonFiniteError):
            mul(Node.constant([1e308]), Node.constant([1e308]))

    @pytest.mark.parametrize("seed", range(100))
    def test_gradients(self, seed: int) -> None:
        r = np.random.default_rng(seed)
        a = Node.parameter(r.normal(size=5))
        b = Node.parameter(r.normal(size=5))

        def objective() -> Node:
            mixed = concat([mul(a, b), sub(sigmoid(a), tanh(b)), add(a, scale(b, 2.0))])
            return reduce_sum(mul(mixed, mixed))

        assert grad_check(objective, [a, b]) <= 1e-4


class TestSoftmax:
    def test_uniform(self) -> None:
        np.testing.assert_allclose(softmax(Node.constant(np.zeros(5))).value, np.full(5, 0.2))

    def test_stability(self) -> None:
        out = softmax(Node.constant([1000.0, 0.0])).value
        assert np.all(np.isfinite(out))
        np.testing.assert_allclose(out, [1.0, 0.0], atol=1e-12)

    def test_closed_form(self) -> None:
        out = softmax(Node.constant(np.log([1.0, 2.0, 3.0]))).value
        np.testing.assert_allclose(out, [1 / 6, 2 / 6, 3 / 6], atol=1e-12)

    def test_sums_to_one_and_permutes(self, rng: np.random.Generator) -> None:
        x = rng.normal(scale=5.0, size=7)
        perm = rng.permutation(7)
        out = softmax(Node.constant(x)).value

        assert abs(out.sum() - 1.0) <= 1e-12
        np.testing.assert_allclose(softmax(Node.constant(x[perm])).value, out[perm], atol=1e-14)

    def test_gradients(self, rng: np.random.Generator) -> None:
        a = Node.parameter(rng.normal(size=4))
        weights = Node.constant(rng.normal(size=4))
        assert grad_check(lambda: reduce_sum(mul(softmax(a), weights)), [a]) <= 1e-4


class TestCosine:
    def test_orthogonal(self) -> None:
        assert cosine(Node.constant([1.0, 0.0]), Node.constant([0.0, 1.0])).item() == 0.0

    def test_identical(self) -> None:
        assert cosine(Node.constant([1.0, 0.0]), Node.constant([1.0, 0.0])).item() == pytest.approx(1.0, abs=1e-7)

    def test_closed_form(self) -> None:
        out = cosine(Node.constant([1.0, 0.0]), Node.constant([1.0, 1.0])).item()
        assert out == pytest.approx(1 / math.sqrt(2), abs=1e-7)

    def test_zero_vector(self) -> None:
        assert cosine(Node.constant([0.0, 0.0]), Node.constant([1.0, 1.0])).item() == 0.0

    def test_self_similarity(self, rng: np.random.Generator) -> None:
        for _ in range(20):
            a = rng.normal(size=6)
            a *= max(0.1, rng.random()) / np.linalg.norm(a)
            assert cosine(Node.constant(a), Node.constant(a)).item() >= 1 - 1e-6

    def test_rows_match_scalar(self, rng: np.random.Generator) -> None:
        rows = rng.normal(size=(4, 3))
        b = rng.normal(size=3)
        expected = [cosine(Node.constant(r), Node.constant(b)).item() for r in rows]
        np.testing.assert_allclose(row_cosine(Node.constant(rows), Node.constant(b)).value, expected, atol=1e-12)

    def test_gradients(self, rng: np.random.Generator) -> None:
        rows = Node.parameter(rng.normal(size=(4, 3)))
        b = Node.parameter(rng.normal(size=3))
        a = Node.parameter(rng.normal(size=3))

        def objective() -> Node:
            return add(reduce_sum(row_cosine(rows, b)), cosine(a, b))

        assert grad_check(objective, [rows, b, a]) <= 1e-4


class TestCrossEntropy:
    def test_uniform(self) -> None:
        for label in range(5):
            assert cross_entropy(Node.constant(np.zeros(5)), label).item() == pytest.approx(math.log(5), abs=1e-12)

    def test_confident(self) -> None:
        assert cross_entropy(Node.constant([10.0, 0.0, 0.0, 0.0, 0.0]), 0).item() == pytest.approx(0.0, abs=2e-4)

    def test_closed_form(self) -> None:
        logits = [1.0, 2.0, 3.0, 4.0, 5.0]
        expected = -(3.0 - math.log(sum(math.exp(v) for v in logits)))
        assert cross_entropy(Node.constant(logits), 2).item() == pytest.approx(expected, abs=1e-12)

    def test_wrong_size(self) -> None:
        with pytest.raises(DimensionError):
            cross_entropy(Node.constant(np.zeros(4)), 0)

    def test_gradients(self, rng: np.random.Generator) -> None:
        logits = Node.parameter(rng.normal(size=5))
        assert grad_check(lambda: cross_entropy(logits, 3), [logits]) <= 1e-4


class TestIndexing:
    def test_slice_and_index(self, rng: np.random.Generator) -> None:
        m = Node.parameter(rng.normal(size=(3, 4)))
        v = Node.parameter(rng.normal(size=8))

        def objective() -> Node:
            return reduce_sum(mul(index(m, 1), slice_(v, 2, 6)))

        assert grad_check(objective, [m, v]) <= 1e-4

    def test_bad_slice(self) -> None:
        with pytest.raises(DimensionError):
            slice_(Node.constant(np.zeros(4)), 2, 6)

    def test_rowwise(self, rng: np.random.Generator) -> None:
        rows = Node.parameter(rng.normal(size=(4, 3)))
        b = Node.parameter(rng.normal(size=3))
        w = Node.parameter(rng.normal(size=4))

        def objective() -> Node:
            return reduce_sum(tanh(scale_rows(add_rowwise(rows, b), w)))

        assert grad_check(objective, [rows, b, w]) <= 1e-4

    def test_stack(self, rng: np.random.Generator) -> None:
        a = Node.parameter(rng.normal(size=3))
        b = Node.parameter(rng.normal(size=3))
        q = rng.normal(size=3)

        np.testing.assert_array_equal(stack([a, b]).value, np.stack([a.value, b.value]))
        assert grad_check(lambda: reduce_sum(row_cosine(stack([a, b, a]), Node.constant(q))), [a, b]) <= 1e-4

        with pytest.raises(DimensionError):
            stack([a, Node.constant(np.zeros(4))])

        with pytest.raises(DimensionError):
            stack([])


class TestConvolution:
    @pytest.mark.parametrize("stride", [1, 2, 3])
    def test_matches_naive(self, stride: int) -> None:
        for seed in range(100):
            r = np.random.default_rng(seed)
            image = r.normal(size=(11, 9))
            kernels = r.normal(size=(3, 3, 3))
            bias = r.normal(size=3)

            out = conv2d(Node.constant(image), Node.constant(kernels), Node.constant(bias), stride).value
            np.testing.assert_allclose(out, naive_conv(image, kernels, bias, stride), atol=1e-10, rtol=0)

    def test_gradients(self, rng: np.random.Generator) -> None:
        image = Node.parameter(rng.normal(size=(9, 9)))
        kernels = Node.parameter(rng.normal(size=(2, 3, 3)))
        bias = Node.parameter(rng.normal(size=2))

        def objective() -> Node:
            pooled = mean_pool(tanh(conv2d(image, kernels, bias, 2)))
            return reduce_sum(mul(pooled, pooled))

        assert grad_check(objective, [image, kernels, bias]) <= 1e-4

    def test_constant_input(self, rng: np.random.Generator) -> None:
        kernels = Node.constant(rng.normal(size=(2, 3, 3)))
        out = conv2d(Node.constant(np.full((8, 8), 0.25)), kernels, Node.constant(np.zeros(2)), 1).value

        for f in range(2):
            np.testing.assert_allclose(out[f], out[f, 0, 0], atol=1e-12)

    def test_kernel_too_large(self) -> None:
        with pytest.raises(DimensionError):
            conv2d(Node.constant(np.zeros((3, 3))), Node.constant(np.zeros((1, 5, 5))), Node.constant(np.zeros(1)))


class TestGradCheck:
    def test_square(self) -> None:
        x = Node.parameter(3.0)
        assert grad_check(lambda: mul(x, x), [x]) <= 1e-6

        x.zero_grad()
        mul(x, x).backward()
        assert x.grad == pytest.approx(6.0)

    def test_constant_objective(self) -> None:
        x = Node.parameter([1.0, 2.0])
        assert grad_check(lambda: Node.constant(4.0), [x]) == 0.0

    def test_restores_values(self, rng: np.random.Generator) -> None:
        x = Node.parameter(rng.normal(size=4))
        before = x.value.copy()
        grad_check(lambda: reduce_sum(tanh(x)), [x])
        np.testing.assert_array_equal(x.value, before)

    def test_non_finite(self) -> None:
        x = Node.parameter([1e200])

        with pytest.raises(GradientCheckError):
            grad_check(lambda: reduce_sum(mul(mul(x, x), x)), [x])

    def test_backward_seed(self) -> None:
        x = Node.parameter([1.0, 2.0])
        reduce_sum(mul(x, x)).backward(np.asarray(0.5))
        np.testing.assert_allclose(x.grad, [1.0, 2.0])

    def test_constants_carry_no_gradient(self) -> None:
        c = Node.constant([1.0, 2.0])
        out = reduce_sum(mul(c, c))

        assert not out.requires_grad
        out.backward()
        np.testing.assert_array_equal(c.grad, [0.0, 0.0])
