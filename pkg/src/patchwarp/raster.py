"""Raster conventions and the inverse-mapping bilinear warp.

Images are ``(H, W, 4)`` float32 RGBA arrays with values in [0, 1]; masks are
``(H, W)`` bool arrays; feature maps are ``(C, H, W)`` float arrays. Pixel
``(r, c)`` covers the continuous square ``[c, c+1) x [r, r+1)`` so its centre
sits at ``(c + 0.5, r + 0.5)``.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from .errors import DimensionMismatch

RasterImage = np.ndarray
BinaryMask = np.ndarray
FeatureMap = np.ndarray


def as_image(img, name: str = "image") -> RasterImage:
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 4:
        raise DimensionMismatch(f"{name} must be (H, W, 4) RGBA, got shape {arr.shape}")
    arr = arr.astype(np.float32, copy=False)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite values")
    return arr


def as_mask(mask, name: str = "mask") -> BinaryMask:
    arr = np.asarray(mask)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.dtype == bool:
        return arr
    return arr > 0.5


def check_same_hw(a: np.ndarray, b: np.ndarray, what: str = "inputs") -> None:
    if a.shape[:2] != b.shape[:2]:
        raise DimensionMismatch(f"{what} differ in size: {a.shape[:2]} vs {b.shape[:2]}")


def empty_image(height: int, width: int) -> RasterImage:
    return np.zeros((height, width, 4), dtype=np.float32)


def pixel_centers(x0: int, y0: int, x1: int, y1: int) -> tuple[np.ndarray, np.ndarray]:
    """Centres of pixels with columns ``[x0, x1)`` and rows ``[y0, y1)`` as (rows, cols) grids."""
    ys, xs = np.mgrid[y0:y1, x0:x1]
    return xs + 0.5, ys + 0.5


def _project(m: np.ndarray, x: np.ndarray, y: np.ndarray):
    w = m[2, 0] * x + m[2, 1] * y + m[2, 2]
    safe = np.where(np.abs(w) > 1e-12, w, 1.0)
    u = (m[0, 0] * x + m[0, 1] * y + m[0, 2]) / safe
    v = (m[1, 0] * x + m[1, 1] * y + m[1, 2]) / safe
    return u, v, w


def sample_bilinear(img: np.ndarray, mask: np.ndarray, u: np.ndarray, v: np.ndarray):
    """Mask-aware bilinear lookup at continuous coordinates.

    Only in-bounds, in-mask neighbours contribute; their weights are
    renormalised. A sample is valid when the pixel containing ``(u, v)`` is
    in bounds and in the mask. Returns ``(values, valid)``.
    """
    h, w = mask.shape
    fx = u - 0.5
    fy = v - 0.5
    x0 = np.floor(fx).astype(np.int64)
    y0 = np.floor(fy).astype(np.int64)
    ax = (fx - x0)[..., None]
    ay = (fy - y0)[..., None]
    acc = np.zeros(u.shape + (img.shape[2],), dtype=np.float64)
    wsum = np.zeros(u.shape + (1,), dtype=np.float64)
    for dy, wy in ((0, 1.0 - ay), (1, ay)):
        for dx, wx in ((0, 1.0 - ax), (1, ax)):
            r = y0 + dy
            c = x0 + dx
            inb = (r >= 0) & (r < h) & (c >= 0) & (c < w)
            rc = np.clip(r, 0, h - 1)
            cc = np.clip(c, 0, w - 1)
            ok = (inb & mask[rc, cc])[..., None]
            wt = np.where(ok, wy * wx, 0.0)
            acc += wt * img[rc, cc]
            wsum += wt
    cu = np.floor(u).astype(np.int64)
    cv = np.floor(v).astype(np.int64)
    inside = (cv >= 0) & (cv < h) & (cu >= 0) & (cu < w)
    valid = inside & mask[np.clip(cv, 0, h - 1), np.clip(cu, 0, w - 1)] & (wsum[..., 0] > 0)
    vals = np.where(wsum > 0, acc / np.where(wsum > 0, wsum, 1.0), 0.0)
    return vals, valid


def inverse_warp(
    src: np.ndarray,
    src_mask: np.ndarray,
    dst_to_src: np.ndarray,
    out_hw: tuple[int, int],
    bbox: Optional[tuple[int, int, int, int]] = None,
    ref_point: Optional[tuple[float, float]] = None,
    src_domain: Optional[tuple[float, float, float, float]] = None,
):
    """Resample ``src`` onto an ``out_hw`` grid through the 3x3 map ``dst_to_src``.

    ``bbox`` = (x0, y0, x1, y1) restricts the destination pixels visited.
    ``ref_point`` is a destination point known to lie inside the patch; pixels
    whose projective weight has the opposite sign lie beyond the horizon and
    are rejected. ``src_domain`` = (x0, y0, x1, y1) further limits valid
    source coordinates. Returns an ``(H, W, 4)`` float32 image, zero where
    invalid, and the ``(H, W)`` bool validity.
    """
    oh, ow = out_hw
    out = np.zeros((oh, ow, src.shape[2]), dtype=np.float32)
    valid = np.zeros((oh, ow), dtype=bool)
    x0, y0, x1, y1 = bbox if bbox is not None else (0, 0, ow, oh)
    x0, y0 = max(int(x0), 0), max(int(y0), 0)
    x1, y1 = min(int(x1), ow), min(int(y1), oh)
    if x0 >= x1 or y0 >= y1:
        return out, valid
    m = np.asarray(dst_to_src, dtype=np.float64)
    xs, ys = pixel_centers(x0, y0, x1, y1)
    u, v, w = _project(m, xs, ys)
    ok = np.abs(w) > 1e-12
    if ref_point is not None:
        wr = m[2, 0] * ref_point[0] + m[2, 1] * ref_point[1] + m[2, 2]
        ok &= np.sign(w) == np.sign(wr)
    if src_domain is not None:
        a0, b0, a1, b1 = src_domain
        ok &= (u >= a0) & (u < a1) & (v >= b0) & (v < b1)
    vals, good = sample_bilinear(src, src_mask, u, v)
    good &= ok
    block = np.clip(vals, 0.0, 1.0).astype(np.float32)
    good &= block[..., 3] > 0
    block[~good] = 0.0
    out[y0:y1, x0:x1] = block
    valid[y0:y1, x0:x1] = good
    return out, valid
