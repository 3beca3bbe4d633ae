"""The reference implementations must be right on their own before they judge anything."""
import ast
from pathlib import Path

import numpy as np

import patchwarp.oracles as oracles
from patchwarp.fixtures import random_quad_array


def test_oracle_homography_identity():
    sq = [(0, 0), (1, 0), (1, 1), (0, 1)]
    np.testing.assert_allclose(oracles.oracle_homography(sq, sq), np.eye(3), atol=1e-12)


def test_oracle_homography_translation():
    sq = [(0, 0), (1, 0), (1, 1), (0, 1)]
    moved = [(x + 2, y + 3) for x, y in sq]
    np.testing.assert_allclose(oracles.oracle_homography(sq, moved),
                               [[1, 0, 2], [0, 1, 3], [0, 0, 1]], atol=1e-12)


def test_oracle_homography_self_consistent():
    rng = np.random.default_rng(0)
    for _ in range(100):
        s = random_quad_array(rng, (50, 50), 40)
        d = random_quad_array(rng, (60, 40), 40)
        m = oracles.oracle_homography(s, d)
        for (x, y), (u, v) in zip(s, d):
            px, py = oracles.oracle_apply(m, x, y)
            assert abs(px - u) < 1e-9 and abs(py - v) < 1e-9


def test_oracle_channel_stats_forced_values():
    mu, sd = oracles.oracle_channel_stats(np.array([[[1.0, -1.0]]]))
    assert mu[0] == 0.0 and sd[0] == 1.0


def test_oracle_conv_identity_kernel():
    x = np.arange(12, dtype=float).reshape(1, 3, 4)
    w = np.zeros((1, 1, 3, 3))
    w[0, 0, 1, 1] = 1.0
    np.testing.assert_array_equal(oracles.oracle_conv2d(x, w, [0.0]), x)


def test_oracle_bilinear_at_centres_and_midpoints():
    img = np.arange(8, dtype=float).reshape(2, 2, 2)
    assert oracles.oracle_bilinear(img, 0.5, 0.5) == [0.0, 1.0]
    assert oracles.oracle_bilinear(img, 1.0, 0.5) == [1.0, 2.0]


def test_oracles_do_not_import_production_code():
    tree = ast.parse(Path(oracles.__file__).read_text())
    for node in ast.walk(tree):
        if isinstance(node, ast.ImportFrom):
            assert node.level == 0 and not (node.module or "").startswith("patchwarp")
        if isinstance(node, ast.Import):
            assert all(not a.name.startswith("patchwarp") for a in node.names)
