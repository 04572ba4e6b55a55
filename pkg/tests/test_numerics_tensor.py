"""Autodiff core: op semantics, backward correctness, tape behaviour."""

import numpy as np
import pytest

from fakefuse.errors import ContractError, ParameterError, ShapeError
from fakefuse.numerics import Tensor, backward, default_tape, no_grad, ops

from helpers import check_grad, leaf


@pytest.fixture(autouse=True)
def clean_tape():
    default_tape().clear()
    yield
    default_tape().clear()


class TestTensorBasics:
    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            Tensor([1.0, np.nan])
        with pytest.raises(ValueError):
            Tensor([np.inf])

    def test_flat_length_matches_shape(self):
        t = Tensor(np.zeros((3, 4, 2)))
        assert t.data.size == 3 * 4 * 2
        assert t.data.flags["C_CONTIGUOUS"]


class TestMatmul:
    def test_identity(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=(2, 2))
        out = ops.matmul(Tensor(a), Tensor(np.eye(2)))
        np.testing.assert_array_equal(out.data, a)

    def test_hand_arithmetic(self):
        a = Tensor([[1.0, 2.0], [3.0, 4.0]])
        b = Tensor([[5.0, 6.0], [7.0, 8.0]])
        np.testing.assert_array_equal(
            ops.matmul(a, b).data, [[19.0, 22.0], [43.0, 50.0]]
        )

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            ops.matmul(Tensor(np.zeros((2, 3))), Tensor(np.zeros((2, 3))))

    def test_grad_vs_finite_differences(self):
        rng = np.random.default_rng(1)
        b = rng.normal(size=(3, 4))

        def build(arr):
            a = leaf(arr)
            out = ops.sum(ops.matmul(a, Tensor(b)))
            return out, a

        check_grad(build, rng.normal(size=(2, 3)))

    def test_batched_grad(self):
        rng = np.random.default_rng(2)
        b = rng.normal(size=(2, 4, 3))

        def build(arr):
            a = leaf(arr)
            out = ops.sum(ops.matmul(a, Tensor(b)))
            return out, a

        check_grad(build, rng.normal(size=(2, 2, 4)))


class TestConv2d:
    def test_one_by_one_identity(self):
        rng = np.random.default_rng(3)
        x = rng.random((1, 5, 5))
        k = np.ones((1, 1, 1, 1))
        out = ops.conv2d(Tensor(x), Tensor(k))
        np.testing.assert_allclose(out.data, x)

    def test_constant_input_averaging_kernel_interior(self):
        x = np.full((1, 8, 8), 0.7)
        k = np.full((1, 1, 3, 3), 1.0 / 9.0)
        out = ops.conv2d(Tensor(x), Tensor(k), padding=1).data[0]
        np.testing.assert_allclose(out[1:-1, 1:-1], 0.7)

    def test_output_shape_formula(self):
        x = Tensor(np.zeros((2, 11, 9)))
        k = Tensor(np.zeros((4, 2, 3, 3)))
        out = ops.conv2d(x, k, stride=2, padding=1)
        assert out.shape == (4, (11 + 2 - 3) // 2 + 1, (9 + 2 - 3) // 2 + 1)

    def test_kernel_larger_than_padded_input(self):
        with pytest.raises(ShapeError):
            ops.conv2d(Tensor(np.zeros((1, 3, 3))), Tensor(np.zeros((1, 1, 5, 5))))

    def test_even_kernel_rejected(self):
        with pytest.raises(ShapeError):
            ops.conv2d(Tensor(np.zeros((1, 8, 8))), Tensor(np.zeros((1, 1, 2, 2))))

    def test_grad_input_vs_finite_differences(self):
        rng = np.random.default_rng(4)
        k = rng.normal(size=(2, 1, 3, 3))

        def build(arr):
            x = leaf(arr)
            out = ops.sum(ops.conv2d(x, Tensor(k), stride=1, padding=1))
            return out, x

        check_grad(build, rng.normal(size=(1, 5, 5)))

    def test_grad_kernel_vs_finite_differences(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=(2, 1, 6, 6))

        def build(arr):
            k = leaf(arr)
            y = ops.conv2d(Tensor(x), k, stride=2, padding=1)
            out = ops.sum(ops.mul(y, y))
            return out, k

        check_grad(build, rng.normal(size=(3, 1, 3, 3)))


class TestSoftmaxCrossEntropy:
    def test_symmetric_logits(self):
        _, probs = ops.softmax_cross_entropy(Tensor([[0.0, 0.0]]), [0])
        np.testing.assert_allclose(probs, [[0.5, 0.5]])

    def test_closed_form_ln3(self):
        _, probs = ops.softmax_cross_entropy(Tensor([[0.0, np.log(3.0)]]), [1])
        np.testing.assert_allclose(probs, [[0.25, 0.75]], atol=1e-12)

    def test_uniform_loss_is_ln2(self):
        loss, _ = ops.softmax_cross_entropy(Tensor([[0.0, 0.0]]), [0])
        assert loss.item() == pytest.approx(np.log(2.0), abs=1e-12)

    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(6)
        logits = Tensor(rng.normal(scale=30.0, size=(16, 5)))
        _, probs = ops.softmax_cross_entropy(logits, rng.integers(0, 5, size=16))
        np.testing.assert_allclose(probs.sum(axis=1), np.ones(16), atol=1e-12)

    def test_probs_strictly_inside_unit_interval(self):
        # moderate logits; at extreme spreads float64 rounds the winner to 1.0
        rng = np.random.default_rng(6)
        logits = Tensor(rng.normal(scale=4.0, size=(16, 5)))
        _, probs = ops.softmax_cross_entropy(logits, rng.integers(0, 5, size=16))
        assert (probs > 0).all() and (probs < 1).all()

    def test_label_out_of_range(self):
        with pytest.raises(IndexError):
            ops.softmax_cross_entropy(Tensor([[0.0, 1.0]]), [2])

    def test_grad_vs_finite_differences(self):
        rng = np.random.default_rng(7)
        labels = rng.integers(0, 3, size=4)

        def build(arr):
            x = leaf(arr)
            loss, _ = ops.softmax_cross_entropy(x, labels)
            return loss, x

        check_grad(build, rng.normal(size=(4, 3)))


class TestDropoutMask:
    def test_p_zero_all_ones(self):
        m = ops.dropout_mask((4, 4), 0.0, np.random.default_rng(0), training=True)
        np.testing.assert_array_equal(m, np.ones((4, 4)))

    def test_inference_passthrough(self):
        m = ops.dropout_mask((8,), 0.5, np.random.default_rng(0), training=False)
        np.testing.assert_array_equal(m, np.ones(8))

    def test_statistics_fixed_seed(self):
        m = ops.dropout_mask((10_000,), 0.5, np.random.default_rng(42), training=True)
        nonzero = m[m != 0]
        assert abs(nonzero.size / m.size - 0.5) <= 0.02
        np.testing.assert_array_equal(nonzero, np.full(nonzero.size, 2.0))

    def test_p_one_rejected(self):
        with pytest.raises(ParameterError):
            ops.dropout_mask((4,), 1.0, np.random.default_rng(0))


class TestBackward:
    def test_sum_grad_is_ones(self):
        x = leaf(np.arange(6.0).reshape(2, 3))
        backward(ops.sum(x))
        np.testing.assert_array_equal(x.grad, np.ones((2, 3)))

    def test_square_grad(self):
        arr = np.array([1.0, -2.0, 3.0])
        x = leaf(arr)
        backward(ops.sum(ops.mul(x, x)))
        np.testing.assert_allclose(x.grad, 2.0 * arr)

    def test_non_scalar_root_rejected(self):
        x = leaf(np.ones((2, 2)))
        y = ops.mul(x, x)
        with pytest.raises(ContractError):
            backward(y)

    def test_tape_consumed(self):
        x = leaf(np.ones(3))
        backward(ops.sum(x))
        assert len(default_tape()) == 0

    def test_mlp_grads_vs_finite_differences(self):
        # randomized 3-layer MLP; checks every parameter gradient
        rng = np.random.default_rng(8)
        xin = rng.normal(size=(4, 6))
        labels = rng.integers(0, 2, size=4)
        shapes = {
            "w1": (6, 8),
            "b1": (8,),
            "w2": (8, 8),
            "b2": (8,),
            "w3": (8, 2),
            "b3": (2,),
        }
        init = {k: rng.normal(scale=0.5, size=s) for k, s in shapes.items()}

        def forward(params):
            h = ops.gelu(ops.add(ops.matmul(Tensor(xin), params["w1"]), params["b1"]))
            h = ops.relu(ops.add(ops.matmul(h, params["w2"]), params["b2"]))
            logits = ops.add(ops.matmul(h, params["w3"]), params["b3"])
            loss, _ = ops.softmax_cross_entropy(logits, labels)
            return loss

        for name in shapes:
            def build(arr, name=name):
                params = {k: Tensor(v) for k, v in init.items()}
                params[name] = leaf(arr)
                return forward(params), params[name]

            check_grad(build, init[name])

    def test_replay_is_deterministic(self):
        def run():
            rng = np.random.default_rng(99)
            x = leaf(rng.normal(size=(3, 5)))
            w = leaf(rng.normal(size=(5, 4)))
            loss, _ = ops.softmax_cross_entropy(
                ops.matmul(x, w), rng.integers(0, 4, size=3)
            )
            backward(loss)
            return loss.item(), x.grad.copy(), w.grad.copy()

        l1, gx1, gw1 = run()
        l2, gx2, gw2 = run()
        assert l1 == l2
        np.testing.assert_array_equal(gx1, gx2)
        np.testing.assert_array_equal(gw1, gw2)


class TestMiscOps:
    def test_no_grad_disables_recording(self):
        x = leaf(np.ones(4))
        with no_grad():
            y = ops.mul(x, x)
        assert len(default_tape()) == 0
        assert not y.requires_grad

    def test_maxpool_grad(self):
        rng = np.random.default_rng(9)
        w = rng.normal(size=(1, 2, 2))

        def build(arr):
            x = leaf(arr)
            out = ops.sum(ops.mul(ops.max_pool2d(x), Tensor(w)))
            return out, x

        check_grad(build, rng.normal(size=(1, 4, 4)))

    def test_layer_norm_grad(self):
        rng = np.random.default_rng(10)
        gamma = rng.normal(size=5)
        beta = rng.normal(size=5)

        def build(arr):
            x = leaf(arr)
            y = ops.layer_norm(x, Tensor(gamma), Tensor(beta))
            return ops.sum(ops.mul(y, y)), x

        check_grad(build, rng.normal(size=(3, 5)))

    def test_softmax_grad_and_rows(self):
        rng = np.random.default_rng(11)
        y = ops.softmax(Tensor(rng.normal(size=(4, 6))))
        np.testing.assert_allclose(y.data.sum(axis=-1), np.ones(4), atol=1e-12)

        w = rng.normal(size=(4, 6))

        def build(arr):
            x = leaf(arr)
            return ops.sum(ops.mul(ops.softmax(x), Tensor(w))), x

        check_grad(build, rng.normal(size=(4, 6)))

    def test_concat_grad(self):
        rng = np.random.default_rng(12)
        b = rng.normal(size=(2, 3))

        def build(arr):
            a = leaf(arr)
            y = ops.concat([a, Tensor(b)], axis=1)
            return ops.sum(ops.mul(y, y)), a

        check_grad(build, rng.normal(size=(2, 2)))

    def test_transpose_reshape_grad(self):
        rng = np.random.default_rng(13)
        w = rng.normal(size=(6, 2))

        def build(arr):
            x = leaf(arr)
            y = ops.reshape(ops.transpose(x, (1, 0, 2)), (6, 2))
            return ops.sum(ops.mul(y, Tensor(w))), x

        check_grad(build, rng.normal(size=(3, 2, 2)))

    def test_gelu_grad(self):
        rng = np.random.default_rng(14)

        def build(arr):
            x = leaf(arr)
            return ops.sum(ops.gelu(x)), x

        check_grad(build, rng.normal(size=(7,)))
