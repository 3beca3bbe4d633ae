import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from patchwarp.errors import ShapeMismatch
from patchwarp.fixtures import random_conv_params
from patchwarp.modulation import (
    AffineParams,
    ConvParams,
    affine_from_features,
    channel_stats,
    conv2d_same,
    spade_backward,
    spade_modulate,
)
from patchwarp.oracles import central_difference, oracle_channel_stats, oracle_conv2d, oracle_modulate
from patchwarp.selfcheck import relative_error


def ones_zeros(h):
    return AffineParams(np.ones_like(h), np.zeros_like(h))


class TestChannelStats:
    def test_constant(self):
        mu, sd = channel_stats(np.full((1, 3, 3), 5.0))
        assert mu[0] == 5.0 and sd[0] == 0.0

    def test_plus_minus_one(self):
        mu, sd = channel_stats(np.array([[[1.0, -1.0]]]))
        assert mu[0] == 0.0 and sd[0] == 1.0

    def test_population_not_sample(self):
        _, sd = channel_stats(np.array([[[0.0, 2.0, 4.0]]]))
        assert sd[0] == pytest.approx(np.sqrt(8 / 3))

    def test_against_oracle(self):
        h = np.random.default_rng(0).normal(1.0, 2.0, size=(3, 7, 5))
        mu, sd = channel_stats(h)
        omu, osd = oracle_channel_stats(h)
        np.testing.assert_allclose(mu, omu, atol=1e-6)
        np.testing.assert_allclose(sd, osd, atol=1e-6)

    def test_keeps_float32(self):
        mu, sd = channel_stats(np.zeros((2, 2, 2), np.float32))
        assert mu.dtype == np.float32 and sd.dtype == np.float32


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-50, 50).filter(lambda a: abs(a) > 1e-3))
def test_stats_scale_covariance(seed, a):
    h = np.random.default_rng(seed).normal(size=(3, 5, 4))
    mu, sd = channel_stats(h)
    mu2, sd2 = channel_stats(a * h)
    np.testing.assert_allclose(mu2, a * mu, atol=1e-6 * max(1, abs(a)))
    np.testing.assert_allclose(sd2, abs(a) * sd, atol=1e-6 * max(1, abs(a)))


class TestModulate:
    def test_identity_within_eps_bound(self):
        h = np.array([[[1.0, -1.0], [1.0, -1.0]]])
        eps = 1e-5
        out = spade_modulate(h, ones_zeros(h), eps)
        assert np.abs(out - h).max() <= eps * np.abs(h).max() / (1 + eps) + 1e-15

    def test_zero_gamma_gives_beta(self):
        rng = np.random.default_rng(1)
        h = rng.normal(size=(2, 3, 3))
        beta = rng.normal(size=h.shape)
        np.testing.assert_array_equal(spade_modulate(h, AffineParams(np.zeros_like(h), beta)), beta)

    def test_against_oracle(self):
        rng = np.random.default_rng(2)
        h, g, b = (rng.normal(size=(8, 16, 16)).astype(np.float32) for _ in range(3))
        out = spade_modulate(h, AffineParams(g, b), 1e-5)
        np.testing.assert_allclose(out, oracle_modulate(h, g, b, 1e-5), atol=1e-5)

    def test_constant_channel_is_finite(self):
        h = np.full((1, 4, 4), 3.0, np.float32)
        out = spade_modulate(h, ones_zeros(h))
        assert np.all(out == 0)

    def test_normalisation_property(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            h = rng.normal(4, 3, size=(8, 16, 16)).astype(np.float32)
            mu, sd = channel_stats(spade_modulate(h, ones_zeros(h), eps=0.0))
            assert np.abs(mu).max() < 1e-5 and np.abs(sd - 1).max() < 1e-4

    def test_shape_mismatch(self):
        h = np.zeros((2, 3, 3))
        with pytest.raises(ShapeMismatch):
            spade_modulate(h, AffineParams(np.zeros((2, 3, 4)), np.zeros((2, 3, 4))))
        with pytest.raises(ShapeMismatch):
            AffineParams(np.zeros((2, 3, 3)), np.zeros((1, 3, 3)))


class TestBackward:
    def setup_method(self):
        rng = np.random.default_rng(4)
        self.h, self.g, self.b, self.up = (rng.normal(size=(2, 4, 4)) for _ in range(4))

    def test_grad_beta_is_upstream(self):
        _, _, gb = spade_backward(self.h, AffineParams(self.g, self.b), 1e-5, self.up)
        np.testing.assert_array_equal(gb, self.up)

    def test_grad_gamma_is_upstream_times_normalised(self):
        _, gg, _ = spade_backward(self.h, AffineParams(self.g, self.b), 1e-5, self.up)
        normed = spade_modulate(self.h, ones_zeros(self.h), 1e-5)
        np.testing.assert_allclose(gg, self.up * normed, atol=1e-6)

    def test_grad_h_finite_difference(self):
        p = AffineParams(self.g, self.b)
        gh, _, _ = spade_backward(self.h, p, 1e-5, self.up)
        num = central_difference(lambda x: float((self.up * spade_modulate(x, p, 1e-5)).sum()), self.h)
        assert relative_error(gh, num) < 1e-3

    def test_constant_channel_gradient(self):
        h = np.zeros((1, 2, 2))
        h[0] = 1.0
        gh, _, _ = spade_backward(h, ones_zeros(h), 1e-5, np.ones_like(h))
        assert np.all(np.isfinite(gh))

    def test_upstream_shape(self):
        with pytest.raises(ShapeMismatch):
            spade_backward(self.h, AffineParams(self.g, self.b), 1e-5, np.zeros((2, 4, 3)))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_gradients_match_finite_differences(seed):
    rng = np.random.default_rng(seed)
    h, g, b, up = (rng.normal(size=(2, 4, 4)) for _ in range(4))
    gh, gg, gb = spade_backward(h, AffineParams(g, b), 1e-5, up)
    loss = lambda hh, gg_, bb: float((up * spade_modulate(hh, AffineParams(gg_, bb), 1e-5)).sum())
    assert relative_error(gh, central_difference(lambda x: loss(x, g, b), h)) < 1e-3
    assert relative_error(gg, central_difference(lambda x: loss(h, x, b), g)) < 1e-3
    assert relative_error(gb, central_difference(lambda x: loss(h, g, x), b)) < 1e-3


class TestConv:
    def test_identity_1x1(self):
        f = np.random.default_rng(5).normal(size=(1, 5, 6)).astype(np.float32)
        p = ConvParams(np.ones((1, 1, 1, 1), np.float32), np.zeros(1, np.float32))
        np.testing.assert_array_equal(conv2d_same(f, p), f)

    def test_zero_weights_give_bias(self):
        p = ConvParams(np.zeros((2, 3, 3, 3), np.float32), np.array([0.5, -2.0], np.float32))
        out = conv2d_same(np.ones((3, 4, 4), np.float32), p)
        np.testing.assert_array_equal(out[0], 0.5)
        np.testing.assert_array_equal(out[1], -2.0)

    @pytest.mark.parametrize("k", [1, 3, 5])
    def test_against_oracle(self, k):
        p = random_conv_params(2, 3, k, seed=k)
        x = np.random.default_rng(k).normal(size=(2, 5, 5)).astype(np.float32)
        np.testing.assert_allclose(conv2d_same(x, p), oracle_conv2d(x, p.weight, p.bias), atol=1e-5)

    def test_kernel_size_restricted(self):
        with pytest.raises(ShapeMismatch):
            ConvParams(np.zeros((1, 1, 7, 7)), np.zeros(1))
        with pytest.raises(ShapeMismatch):
            ConvParams(np.zeros((1, 1, 3, 3)), np.zeros(2))

    def test_channel_mismatch(self):
        with pytest.raises(ShapeMismatch):
            conv2d_same(np.zeros((3, 4, 4)), random_conv_params(2, 2))

    def test_affine_from_features(self):
        f = np.random.default_rng(6).normal(size=(4, 6, 6)).astype(np.float32)
        cg, cb = random_conv_params(4, 5, 3, 1), random_conv_params(4, 5, 3, 2)
        p = affine_from_features(f, cg, cb)
        np.testing.assert_array_equal(p.gamma, conv2d_same(f, cg))
        np.testing.assert_array_equal(p.beta, conv2d_same(f, cb))
        with pytest.raises(ShapeMismatch):
            affine_from_features(f, cg, random_conv_params(4, 3, 3, 2))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_conv_linearity(seed, a, b):
    rng = np.random.default_rng(seed)
    p = random_conv_params(3, 2, 3, seed=seed % 1000)
    x, y = (rng.normal(size=(3, 6, 5)) for _ in range(2))
    lhs = conv2d_same(a * x + b * y, p)
    rhs = a * conv2d_same(x, p) + b * conv2d_same(y, p) - (a + b - 1) * p.bias[:, None, None]
    assert np.abs(lhs - rhs).max() < 1e-5


class TestSerialization:
    def test_roundtrip(self, tmp_path):
        p = random_conv_params(3, 4, 5, seed=7)
        p.save(tmp_path / "c.bin")
        q = ConvParams.load(tmp_path / "c.bin")
        np.testing.assert_array_equal(q.weight, p.weight)
        np.testing.assert_array_equal(q.bias, p.bias)
        assert (tmp_path / "c.bin").read_bytes()[:4] == b"CNVP"

    def test_size(self):
        data = random_conv_params(2, 3, 3).to_bytes()
        assert len(data) == 20 + 4 * (3 * 2 * 9 + 3) + 4

    @pytest.mark.parametrize("where", [0, 4, 30, -1])
    def test_corruption_detected(self, where):
        data = bytearray(random_conv_params(2, 3, 3).to_bytes())
        data[where] ^= 0xFF
        with pytest.raises(ValueError):
            ConvParams.from_bytes(bytes(data))

    def test_truncated(self):
        data = random_conv_params(2, 3, 3).to_bytes()
        with pytest.raises(ValueError):
            ConvParams.from_bytes(data[:-8])
