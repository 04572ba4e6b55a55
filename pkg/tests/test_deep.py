"""CNN and transformer embedders: shapes, invariances, gradient checks."""

import numpy as np
import pytest

from fakefuse.deep import (
    CnnConfig,
    VitConfig,
    cnn_embed,
    cnn_forward,
    init_cnn_params,
    init_vit_params,
    multihead_attention,
    patchify,
    unpatchify,
    vit_embed,
    vit_forward,
)
from fakefuse.errors import ParameterError, ShapeError
from fakefuse.media import Frame
from fakefuse.numerics import Tensor, backward, default_tape, no_grad, ops

from helpers import check_grad, leaf


@pytest.fixture(autouse=True)
def clean_tape():
    default_tape().clear()
    yield
    default_tape().clear()


class TestPatchify:
    def test_counts_and_lengths(self):
        img = np.random.default_rng(0).random((32, 32, 1))
        p = patchify(img, 16)
        assert p.shape == (4, 256)

    def test_constant_image_identical_patches(self):
        p = patchify(np.full((32, 32, 1), 0.3), 16)
        assert np.ptp(p) == 0.0

    def test_round_trip(self):
        img = np.random.default_rng(1).random((48, 32, 3))
        p = patchify(img, 16)
        np.testing.assert_array_equal(unpatchify(p, 48, 32, 16, 3), img)

    def test_indivisible_rejected(self):
        with pytest.raises(ShapeError):
            patchify(np.zeros((30, 32, 1)), 16)


class TestCnn:
    def test_zero_input_zero_embedding(self):
        cfg = CnnConfig(channels=(4, 8), input_size=16)
        params = init_cnn_params(cfg, np.random.default_rng(0))
        frame = Frame(np.zeros((16, 16, 1)))
        embed, acts = cnn_embed(frame, params, cfg)
        np.testing.assert_array_equal(embed, np.zeros(8))
        np.testing.assert_array_equal(acts, np.zeros((8, 4, 4)))

    def test_embedding_length_independent_of_input_size(self):
        rng = np.random.default_rng(1)
        for size in (64, 224):
            cfg = CnnConfig(input_size=size)
            params = init_cnn_params(cfg, np.random.default_rng(0))
            embed, acts = cnn_embed(Frame(rng.random((size, size, 1))), params, cfg)
            assert embed.shape == (32,)
            assert acts.shape == (32, size // 8, size // 8)

    def test_activations_non_negative(self):
        cfg = CnnConfig(channels=(4, 8), input_size=16)
        params = init_cnn_params(cfg, np.random.default_rng(2))
        _, acts = cnn_embed(Frame(np.random.default_rng(3).random((16, 16, 1))), params, cfg)
        assert acts.min() >= 0.0

    def test_indivisible_input_rejected(self):
        with pytest.raises(ParameterError):
            CnnConfig(channels=(4, 8), input_size=18)

    def test_input_gradient_vs_finite_differences(self):
        cfg = CnnConfig(channels=(3, 5), input_size=16)
        params = init_cnn_params(cfg, np.random.default_rng(4))
        readout = np.random.default_rng(5).normal(size=5)

        def build(arr):
            x = leaf(arr[None])
            embed, _ = cnn_forward(x, params, cfg)
            return ops.sum(ops.mul(embed, Tensor(readout))), x

        check_grad(build, np.random.default_rng(6).random((1, 16, 16)))

    def test_param_gradients_vs_finite_differences(self):
        cfg = CnnConfig(channels=(2, 3), input_size=8)
        base = init_cnn_params(cfg, np.random.default_rng(7))
        x0 = np.random.default_rng(8).random((2, 1, 8, 8))
        readout = np.random.default_rng(9).normal(size=3)

        for name in base:
            def build(arr, name=name):
                params = {k: Tensor(v.data) for k, v in base.items()}
                params[name] = leaf(arr)
                embed, _ = cnn_forward(Tensor(x0), params, cfg)
                return ops.sum(ops.mul(embed, Tensor(readout))), params[name]

            check_grad(build, base[name].data)


class TestAttention:
    def make_params(self, d, seed=0):
        cfg = VitConfig(patch=16, dim=d, blocks=1, heads=2, input_size=16)
        params = init_vit_params(cfg, np.random.default_rng(seed))
        return cfg, params

    def test_single_token_weight_is_one(self):
        cfg, params = self.make_params(8)
        tok = np.random.default_rng(1).normal(size=(1, 8))
        out, w = multihead_attention(
            Tensor(tok), params, heads=2, prefix="vit.b0.", return_weights=True
        )
        np.testing.assert_allclose(w, 1.0)
        v = tok @ params["vit.b0.attn.wv"].data + params["vit.b0.attn.bv"].data
        expected = v @ params["vit.b0.attn.wo"].data + params["vit.b0.attn.bo"].data
        np.testing.assert_allclose(out.data, expected, atol=1e-12)

    def test_weight_rows_sum_to_one(self):
        cfg, params = self.make_params(8, seed=2)
        tok = np.random.default_rng(3).normal(size=(6, 8))
        _, w = multihead_attention(
            Tensor(tok), params, heads=2, prefix="vit.b0.", return_weights=True
        )
        np.testing.assert_allclose(w.sum(axis=-1), np.ones((2, 6)), atol=1e-12)
        assert (w >= 0).all()

    def test_permutation_equivariance(self):
        cfg, params = self.make_params(8, seed=4)
        rng = np.random.default_rng(5)
        tok = rng.normal(size=(5, 8))
        perm = rng.permutation(5)
        out = multihead_attention(Tensor(tok), params, 2, "vit.b0.").data
        out_p = multihead_attention(Tensor(tok[perm]), params, 2, "vit.b0.").data
        np.testing.assert_allclose(out_p, out[perm], atol=1e-12)


class TestVit:
    def test_embedding_length(self):
        cfg = VitConfig(input_size=32)
        params = init_vit_params(cfg, np.random.default_rng(0))
        emb = vit_embed(Frame(np.random.default_rng(1).random((32, 32, 1))), params, cfg)
        assert emb.shape == (32,)

    def test_patch_permutation_invariance_with_zero_pos(self):
        cfg = VitConfig(patch=16, dim=16, blocks=2, heads=2, input_size=64)
        params = init_vit_params(cfg, np.random.default_rng(2))
        params["vit.pos"] = Tensor(np.zeros((cfg.num_patches, cfg.dim)), requires_grad=True)
        rng = np.random.default_rng(3)
        img = rng.random((64, 64, 1))
        patches = patchify(img, 16)
        perm = rng.permutation(patches.shape[0])
        img_p = unpatchify(patches[perm], 64, 64, 16, 1)
        with no_grad():
            e1 = vit_forward(Tensor(img[None, None, :, :, 0]), params, cfg).data
            e2 = vit_forward(Tensor(img_p[None, None, :, :, 0]), params, cfg).data
        np.testing.assert_allclose(e1, e2, atol=1e-10)

    def test_positional_embeddings_break_invariance(self):
        cfg = VitConfig(patch=16, dim=16, blocks=2, heads=2, input_size=64)
        params = init_vit_params(cfg, np.random.default_rng(4))
        rng = np.random.default_rng(5)
        img = rng.random((64, 64, 1))
        patches = patchify(img, 16)
        perm = np.roll(np.arange(patches.shape[0]), 1)
        img_p = unpatchify(patches[perm], 64, 64, 16, 1)
        with no_grad():
            e1 = vit_forward(Tensor(img[None, None, :, :, 0]), params, cfg).data
            e2 = vit_forward(Tensor(img_p[None, None, :, :, 0]), params, cfg).data
        assert np.abs(e1 - e2).max() > 1e-8

    def test_deterministic(self):
        cfg = VitConfig(input_size=32)
        params = init_vit_params(cfg, np.random.default_rng(6))
        f = Frame(np.random.default_rng(7).random((32, 32, 1)))
        np.testing.assert_array_equal(vit_embed(f, params, cfg), vit_embed(f, params, cfg))

    def test_input_gradient_vs_finite_differences(self):
        cfg = VitConfig(patch=16, dim=8, blocks=2, heads=2, input_size=32)
        params = init_vit_params(cfg, np.random.default_rng(8))
        readout = np.random.default_rng(9).normal(size=8)

        def build(arr):
            x = leaf(arr[None, None])
            emb = vit_forward(x, params, cfg)
            return ops.sum(ops.mul(emb, Tensor(readout))), x

        check_grad(build, np.random.default_rng(10).random((32, 32)))
