"""Misalignment masks between the predicted garment shape and the warped garment,
and average-feature inpainting of the misaligned region."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyAlignedRegion
from .raster import as_image, as_mask

# Colour scheme for diagnostics: kept garment, region to inpaint, region to remove.
ALIGNED_RGB = (0.55, 0.55, 0.55)
INPAINT_RGB = (1.0, 0.55, 0.0)
REMOVE_RGB = (0.1, 0.75, 0.2)


@dataclass(frozen=True, eq=False)
class AlignmentMasks:
    aligned: np.ndarray
    misaligned: np.ndarray

    def resized(self, hw: tuple[int, int]) -> "AlignmentMasks":
        return AlignmentMasks(resize_mask_nearest(self.aligned, hw), resize_mask_nearest(self.misaligned, hw))


def compute_alignment(m_g, m_t) -> AlignmentMasks:
    """aligned = m_g AND m_t; misaligned = m_g AND NOT aligned."""
    m_g = as_mask(m_g, "m_g")
    m_t = as_mask(m_t, "m_t")
    if m_g.shape != m_t.shape:
        raise DimensionMismatch(f"mask shapes differ: {m_g.shape} vs {m_t.shape}")
    aligned = m_g & m_t
    return AlignmentMasks(aligned, m_g & ~aligned)


def mask_garment(g_t, m_g) -> np.ndarray:
    g_t = as_image(g_t, "g_t")
    m_g = as_mask(m_g, "m_g")
    if g_t.shape[:2] != m_g.shape:
        raise DimensionMismatch(f"image {g_t.shape[:2]} and mask {m_g.shape} differ")
    return g_t * m_g[..., None].astype(g_t.dtype)


def resize_mask_nearest(mask, hw: tuple[int, int]) -> np.ndarray:
    """Nearest-neighbour resize sampling at destination pixel centres, thresholded at 0.5."""
    m = np.asarray(mask, dtype=np.float64)
    h, w = m.shape
    oh, ow = hw
    rows = np.minimum(((np.arange(oh) + 0.5) * h / oh).astype(np.int64), h - 1)
    cols = np.minimum(((np.arange(ow) + 0.5) * w / ow).astype(np.int64), w - 1)
    return m[np.ix_(rows, cols)] >= 0.5


def inpaint_features(f_raw, masks: AlignmentMasks) -> np.ndarray:
    """Fill the misaligned locations of every channel with that channel's mean over the aligned region.

    Masks at a different resolution from ``f_raw`` are resampled with
    :func:`resize_mask_nearest` first.
    """
    f = np.asarray(f_raw)
    if f.ndim != 3:
        raise DimensionMismatch(f"feature map must be (C, H, W), got {f.shape}")
    if not np.all(np.isfinite(f)):
        raise ValueError("feature map has non-finite values")
    if masks.aligned.shape != f.shape[1:]:
        masks = masks.resized(f.shape[1:])
    mis = masks.misaligned
    if not mis.any():
        return f.copy()
    n = int(masks.aligned.sum())
    if n == 0:
        raise EmptyAlignedRegion("misaligned region is non-empty but nothing is aligned")
    mean = f[:, masks.aligned].sum(axis=1, dtype=np.float64) / n
    out = f.copy()
    out[:, mis] = mean.astype(f.dtype)[:, None]
    return out


def alignment_visualization(m_g, m_t) -> np.ndarray:
    """RGB diagnostic: grey kept, orange to inpaint (m_g minus m_t), green to remove (m_t minus m_g)."""
    masks = compute_alignment(m_g, m_t)
    removed = as_mask(m_t) & ~as_mask(m_g)
    out = np.zeros(masks.aligned.shape + (3,), dtype=np.float32)
    out[masks.aligned] = ALIGNED_RGB
    out[masks.misaligned] = INPAINT_RGB
    out[removed] = REMOVE_RGB
    return out
