"""Training loss arithmetic: reconstruction, perceptual, mask and weighted total.

All L1 norms are mean-reduced so values do not scale with resolution.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Protocol, Sequence

import numpy as np

from .errors import DimensionMismatch

LAMBDA_REC = 40.0
LAMBDA_PERC = 40.0
LAMBDA_MASK = 100.0
PERCEPTUAL_LAYER_WEIGHTS = (1 / 32, 1 / 16, 1 / 8, 1 / 4, 1.0)

# Optimiser settings of the original training run; recorded, not used.
ADAM_BETA1 = 0.0
ADAM_BETA2 = 0.99
LEARNING_RATE = 0.002
BATCH_SIZE = 96


@dataclass(frozen=True)
class LossWeights:
    lambda_rec: float = LAMBDA_REC
    lambda_perc: float = LAMBDA_PERC
    lambda_mask: float = LAMBDA_MASK
    layer_weights: tuple[float, ...] = PERCEPTUAL_LAYER_WEIGHTS

    def __post_init__(self):
        vals = (self.lambda_rec, self.lambda_perc, self.lambda_mask) + tuple(self.layer_weights)
        if len(self.layer_weights) != 5:
            raise ValueError("need exactly 5 perceptual layer weights")
        if not all(np.isfinite(v) and v >= 0 for v in vals):
            raise ValueError("loss weights must be finite and non-negative")


class FeatureExtractor(Protocol):
    def __call__(self, image: np.ndarray) -> Sequence[np.ndarray]:
        """Return five feature maps for an (H, W, C) image."""


class PyramidExtractor:
    """Five-level average-pooling pyramid: level 1 is the image, level k is pooled 2^(k-1) times."""

    levels = 5

    def __call__(self, image: np.ndarray) -> list[np.ndarray]:
        x = np.asarray(image, dtype=np.float64)
        out = [x]
        for _ in range(self.levels - 1):
            h, w = x.shape[0] // 2, x.shape[1] // 2
            if h == 0 or w == 0:
                raise DimensionMismatch(f"image {image.shape[:2]} too small for a {self.levels}-level pyramid")
            x = x[: 2 * h, : 2 * w].reshape(h, 2, w, 2, -1).mean(axis=(1, 3))
            out.append(x)
        return out


def l1_loss(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    return float(np.abs(a - b).mean())


def reconstruction_loss(coarse, fine, target) -> float:
    return l1_loss(coarse, target) + l1_loss(fine, target)


def perceptual_loss(coarse, fine, target, fx: FeatureExtractor = PyramidExtractor(),
                    weights: Sequence[float] = PERCEPTUAL_LAYER_WEIGHTS) -> float:
    weights = tuple(weights)
    if len(weights) != 5:
        raise ValueError("need exactly 5 layer weights")
    ref = fx(target)
    total = 0.0
    for img in (coarse, fine):
        feats = fx(img)
        for lam, f, r in zip(weights, feats, ref):
            total += lam * l1_loss(f, r)
    return total


def mask_loss(m_pred, m_gt) -> float:
    return l1_loss(np.asarray(m_pred, dtype=np.float64), np.asarray(m_gt, dtype=np.float64))


def total_loss(parts: Mapping[str, float], w: LossWeights = LossWeights()) -> float:
    """``gan + lambda_rec * rec + lambda_perc * perc + lambda_mask * mask``."""
    return (float(parts["gan"]) + w.lambda_rec * float(parts["rec"])
            + w.lambda_perc * float(parts["perc"]) + w.lambda_mask * float(parts["mask"]))
