import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from patchwarp.alignment import (
    INPAINT_RGB,
    REMOVE_RGB,
    AlignmentMasks,
    alignment_visualization,
    compute_alignment,
    inpaint_features,
    mask_garment,
    resize_mask_nearest,
)
from patchwarp.errors import DimensionMismatch, EmptyAlignedRegion
from patchwarp.oracles import oracle_inpaint


def cols(lo, hi, width=15):
    m = np.zeros((1, width), bool)
    m[0, lo:hi + 1] = True
    return m


def all_4x4_masks():
    return ((np.arange(1 << 16)[:, None] >> np.arange(16)) & 1).astype(bool).reshape(-1, 4, 4)


def mosaic(stack):
    """Lay (N, 4, 4) masks side by side as one (4, 4N) mask."""
    return np.ascontiguousarray(stack.transpose(1, 0, 2).reshape(4, -1))


class TestComputeAlignment:
    def test_strip(self):
        m = compute_alignment(cols(0, 9), cols(5, 14))
        np.testing.assert_array_equal(m.aligned, cols(5, 9))
        np.testing.assert_array_equal(m.misaligned, cols(0, 4))

    def test_equal_masks(self):
        g = np.random.default_rng(0).random((9, 9)) < 0.5
        m = compute_alignment(g, g)
        assert not m.misaligned.any()
        np.testing.assert_array_equal(m.aligned, g)

    def test_superset_target(self):
        g = cols(4, 8)
        t = cols(0, 14)
        m = compute_alignment(g, t)
        np.testing.assert_array_equal(m.aligned, g)
        assert not m.misaligned.any()
        assert not ((m.aligned | m.misaligned) & ~g).any()

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            compute_alignment(np.ones((3, 3)), np.ones((3, 4)))

    def test_exhaustive_4x4_partition(self):
        every = all_4x4_masks()
        scrambled = every[(np.arange(1 << 16) * 40503) % (1 << 16)]
        for mg, mt in ((every, scrambled), (every, np.broadcast_to(every[0x5A3C], every.shape))):
            m = compute_alignment(mosaic(mg), mosaic(mt))
            assert not (m.aligned & m.misaligned).any()
            assert np.array_equal(m.aligned | m.misaligned, mosaic(mg))


class TestMaskGarment:
    def test_all_ones_and_zeros(self):
        img = np.random.default_rng(1).random((6, 7, 4)).astype(np.float32)
        np.testing.assert_array_equal(mask_garment(img, np.ones((6, 7))), img)
        assert not mask_garment(img, np.zeros((6, 7))).any()

    def test_checkerboard_against_loop(self):
        img = np.random.default_rng(2).random((8, 10, 4)).astype(np.float32)
        m = (np.add.outer(np.arange(8), np.arange(10)) % 2).astype(bool)
        out = mask_garment(img, m)
        for y in range(8):
            for x in range(10):
                for c in range(4):
                    assert out[y, x, c] == (img[y, x, c] if m[y, x] else 0.0)

    def test_mismatch(self):
        with pytest.raises(DimensionMismatch):
            mask_garment(np.zeros((4, 4, 4)), np.ones((4, 5)))


class TestInpaint:
    def test_constant(self):
        f = np.full((2, 1, 15), 7.0, np.float32)
        f[:, 0, :5] = -3.0
        out = inpaint_features(f, compute_alignment(cols(0, 9), cols(5, 14)))
        np.testing.assert_array_equal(out[:, 0, :10], 7.0)
        np.testing.assert_array_equal(out[:, 0, 10:], 7.0)

    def test_mean_of_two(self):
        f = np.zeros((1, 1, 4), np.float32)
        f[0, 0] = [9.0, 1.0, 3.0, 9.0]
        masks = AlignmentMasks(np.array([[False, True, True, False]]), np.array([[True, False, False, True]]))
        np.testing.assert_array_equal(inpaint_features(f, masks)[0, 0], [2.0, 1.0, 3.0, 2.0])

    def test_random_against_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            f = rng.normal(size=(4, 8, 8)).astype(np.float32)
            m = compute_alignment(rng.random((8, 8)) < 0.6, rng.random((8, 8)) < 0.6)
            if not m.aligned.any():
                continue
            out = inpaint_features(f, m)
            np.testing.assert_allclose(out, oracle_inpaint(f, m.aligned, m.misaligned), atol=1e-6)

    def test_empty_aligned_region(self):
        m = compute_alignment(cols(0, 4), cols(10, 14))
        with pytest.raises(EmptyAlignedRegion):
            inpaint_features(np.ones((1, 1, 15)), m)

    def test_nothing_misaligned_is_identity(self):
        f = np.random.default_rng(4).normal(size=(2, 3, 3))
        m = compute_alignment(np.zeros((3, 3)), np.ones((3, 3)))
        np.testing.assert_array_equal(inpaint_features(f, m), f)

    def test_resamples_masks_to_feature_grid(self):
        mg = np.zeros((8, 8), bool)
        mg[:, :6] = True
        mt = np.zeros((8, 8), bool)
        mt[:, 2:] = True
        f = np.arange(16, dtype=np.float32).reshape(1, 4, 4)
        out = inpaint_features(f, compute_alignment(mg, mt))
        # at 4x4: aligned = cols 1-2, misaligned = col 0
        mean = f[0, :, 1:3].mean()
        np.testing.assert_allclose(out[0, :, 0], mean)
        np.testing.assert_array_equal(out[0, :, 1:], f[0, :, 1:])

    def test_feature_shape_checked(self):
        with pytest.raises(DimensionMismatch):
            inpaint_features(np.zeros((4, 4)), compute_alignment(np.ones((4, 4)), np.ones((4, 4))))


def test_resize_nearest():
    m = np.zeros((4, 4), bool)
    m[:2, :2] = True
    np.testing.assert_array_equal(resize_mask_nearest(m, (2, 2)), [[True, False], [False, False]])
    np.testing.assert_array_equal(resize_mask_nearest(m, (8, 8))[:4, :4], np.ones((4, 4), bool))


def test_visualization_colours():
    vis = alignment_visualization(cols(0, 9), cols(5, 14))
    np.testing.assert_allclose(vis[0, 0], INPAINT_RGB)
    np.testing.assert_allclose(vis[0, 12], REMOVE_RGB)


mask8 = arrays(bool, (8, 8))


@settings(max_examples=80, deadline=None)
@given(mask8, mask8, st.integers(0, 2**32 - 1))
def test_inpaint_properties(mg, mt, seed):
    m = compute_alignment(mg, mt)
    assert not (m.aligned & m.misaligned).any()
    assert np.array_equal(m.aligned | m.misaligned, mg)
    f = np.random.default_rng(seed).normal(size=(3, 8, 8)).astype(np.float32)
    if m.misaligned.any() and not m.aligned.any():
        with pytest.raises(EmptyAlignedRegion):
            inpaint_features(f, m)
        return
    once = inpaint_features(f, m)
    np.testing.assert_array_equal(once[:, ~m.misaligned], f[:, ~m.misaligned])
    if m.misaligned.any():
        means = f[:, m.aligned].astype(np.float64).mean(axis=1)
        assert np.abs(once[:, m.misaligned] - means[:, None]).max() < 1e-5
    np.testing.assert_array_equal(inpaint_features(once, m), once)
