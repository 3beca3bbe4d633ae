"""Synthetic garments, poses and parameter fixtures for tests, demos and the CLI.

Everything is generated from an integer seed.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np
from scipy import ndimage

from .patching import PatchLayout, PoseKeypoints, build_patch_layout, quad_union_mask

TEXTURES = ("solid", "checker", "stripes", "logo-dot")

# Canonical T-pose around the origin; shoulders at (+-50, 0), hips at (+-30, 120).
TPOSE_JOINTS = {
    "neck": (0.0, -10.0),
    "l_shoulder": (50.0, 0.0),
    "r_shoulder": (-50.0, 0.0),
    "l_elbow": (110.0, 0.0),
    "r_elbow": (-110.0, 0.0),
    "l_wrist": (170.0, 0.0),
    "r_wrist": (-170.0, 0.0),
    "l_hip": (30.0, 120.0),
    "r_hip": (-30.0, 120.0),
}

TPOSE_CANVAS = (240, 400)   # (height, width)
TPOSE_OFFSET = (200.0, 50.0)


def canonical_tpose(offset: tuple[float, float] = (0.0, 0.0)) -> PoseKeypoints:
    dx, dy = offset
    return PoseKeypoints({n: (x + dx, y + dy, 1.0) for n, (x, y) in TPOSE_JOINTS.items()})


def make_texture(kind: str, hw: tuple[int, int], seed: int = 0) -> np.ndarray:
    """Band-limited RGB texture in [0, 1], shape ``hw + (3,)``, float32."""
    if kind not in TEXTURES:
        raise ValueError(f"unknown texture {kind!r}; expected one of {TEXTURES}")
    rng = np.random.default_rng(seed)
    h, w = hw
    c0 = rng.uniform(0.15, 0.85, size=3)
    c1 = rng.uniform(0.15, 0.85, size=3)
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    if kind == "solid":
        t = np.zeros(hw)
    elif kind == "checker":
        cell = 16
        ox, oy = rng.integers(0, cell, size=2)
        t = (((xs + ox) // cell + (ys + oy) // cell) % 2).astype(np.float64)
    elif kind == "stripes":
        period = 16.0
        ang = rng.uniform(0, np.pi)
        phase = rng.uniform(0, period)
        proj = xs * np.cos(ang) + ys * np.sin(ang) + phase
        t = ((proj % period) < period / 2).astype(np.float64)
    else:
        spacing, radius = 24, 6.0
        ox, oy = rng.uniform(0, spacing, size=2)
        dx = (xs - ox) % spacing - spacing / 2
        dy = (ys - oy) % spacing - spacing / 2
        t = (dx * dx + dy * dy <= radius * radius).astype(np.float64)
        # one larger "logo" ring near the middle
        cy, cx = h / 2, w / 2
        r = np.hypot(xs - cx, ys - cy)
        t = np.maximum(t, ((r > 14) & (r < 22)).astype(np.float64))
    if kind != "solid":
        t = ndimage.gaussian_filter(t, sigma=1.5, mode="wrap")
    rgb = c0 * (1 - t[..., None]) + c1 * t[..., None]
    return rgb.astype(np.float32)


def rgba(rgb: np.ndarray, mask: np.ndarray) -> np.ndarray:
    out = np.zeros(rgb.shape[:2] + (4,), dtype=np.float32)
    out[..., :3] = np.where(mask[..., None], rgb, 0.0)
    out[..., 3] = mask
    return out


def make_tpose_fixture(seed: int = 0, texture: str = "checker"):
    """A textured upper garment over the canonical T-pose.

    Returns ``(image, mask, pose)``: an RGBA image of size
    :data:`TPOSE_CANVAS`, its garment mask (exactly the nonzero-alpha pixels,
    the union of the eight layout quads) and the pose.
    """
    pose = canonical_tpose(TPOSE_OFFSET)
    layout = build_patch_layout(pose, "upper")
    mask = quad_union_mask(layout, TPOSE_CANVAS)
    tex = make_texture(texture, TPOSE_CANVAS, seed)
    return rgba(tex, mask), mask, pose


def content_hash(*arrays: np.ndarray) -> str:
    h = hashlib.sha256()
    for a in arrays:
        a = np.ascontiguousarray(a)
        h.update(str(a.dtype).encode())
        h.update(str(a.shape).encode())
        h.update(a.tobytes())
    return h.hexdigest()


def random_quad_array(rng: np.random.Generator, center=(0.0, 0.0), scale: float = 50.0,
                      jitter: float = 0.25) -> np.ndarray:
    """Four corners of a randomly rotated, perturbed rectangle; always positively wound and convex."""
    while True:
        w, h = rng.uniform(0.5, 1.5, size=2) * scale
        base = np.array([[-w, -h], [w, -h], [w, h], [-w, h]]) / 2
        base += rng.uniform(-jitter, jitter, size=(4, 2)) * scale / 2
        t = rng.uniform(0, 2 * np.pi)
        rot = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
        pts = base @ rot.T + center
        if _convex_positive(pts):
            return pts


def _convex_positive(pts: np.ndarray) -> bool:
    for i in range(4):
        o, a, b = pts[i], pts[(i + 1) % 4], pts[(i + 2) % 4]
        if (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]) <= 1e-3:
            return False
    return True


def random_conv_params(cin: int, cout: int, k: int = 3, seed: int = 0):
    """Seeded He-style initialisation; weights N(0, 2 / (cin k^2)), bias N(0, 0.1)."""
    from .modulation import ConvParams

    rng = np.random.default_rng(seed)
    wt = rng.normal(0.0, np.sqrt(2.0 / (cin * k * k)), size=(cout, cin, k, k))
    b = rng.normal(0.0, 0.1, size=cout)
    return ConvParams(wt.astype(np.float32), b.astype(np.float32))


def random_projection_encoder(image: np.ndarray, channels: int = 8, stride: int = 4,
                              seed: int = 0) -> np.ndarray:
    """Stand-in garment encoder: average-pool by ``stride`` then a fixed random 4 -> C projection."""
    rng = np.random.default_rng(seed)
    proj = rng.normal(0.0, 1.0, size=(channels, image.shape[2])).astype(np.float32)
    h, w = image.shape[0] // stride, image.shape[1] // stride
    pooled = image[: h * stride, : w * stride].reshape(h, stride, w, stride, -1).mean(axis=(1, 3))
    return np.einsum("ck,hwk->chw", proj, pooled).astype(np.float32)


def write_bundle(out_dir, seed: int = 0, texture: str = "checker",
                 target_offset: tuple[float, float] = (0.0, 0.0)) -> dict:
    """Write a T-pose job bundle for the CLI.

    Layout::

        out_dir/source.png         RGBA garment
        out_dir/source_mask.png    8-bit gray, 0 / 255
        out_dir/source_pose.json   keypoint JSON
        out_dir/target_pose.json   source pose shifted by ``target_offset``
        out_dir/job.json           config naming the four files

    Returns the job config dict.
    """
    from . import io

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    image, mask, pose = make_tpose_fixture(seed, texture)
    io.write_rgba_png(out / "source.png", image)
    io.write_mask_png(out / "source_mask.png", mask)
    io.write_pose_json(out / "source_pose.json", pose)
    io.write_pose_json(out / "target_pose.json", pose.translated(*target_offset))
    job = {
        "source_image": "source.png",
        "source_mask": "source_mask.png",
        "source_pose": "source_pose.json",
        "target_pose": "target_pose.json",
        "garment_kind": "upper",
        "seed": seed,
    }
    (out / "job.json").write_text(json.dumps(job, indent=2) + "\n")
    return job


def tpose_layout() -> PatchLayout:
    return build_patch_layout(canonical_tpose(), "upper")

