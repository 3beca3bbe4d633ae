"""PNG and keypoint-JSON reading and writing.

Keypoint files look like::

    {"format": "coco18",
     "keypoints": {"l_shoulder": [x, y, confidence], ...}}

Unknown joint names are ignored. Masks are 8-bit grayscale PNGs thresholded
at 128. Writes go to a temporary file in the target directory and are
renamed into place.
"""
from __future__ import annotations

import io as _io
import json
import os
import tempfile
from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image

from .patching import JOINT_NAMES, PoseKeypoints
from .roles import PatchRole

PathLike = Union[str, Path]


class InputError(ValueError):
    """An input file is missing or cannot be parsed."""

    def __init__(self, path: PathLike, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = str(path)


def atomic_write_bytes(path: PathLike, data: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _png_bytes(img: Image.Image) -> bytes:
    buf = _io.BytesIO()
    img.save(buf, format="PNG", optimize=False)
    return buf.getvalue()


def to_uint8(x: np.ndarray) -> np.ndarray:
    return np.round(np.clip(x, 0.0, 1.0) * 255.0).astype(np.uint8)


def rgba_png_bytes(image: np.ndarray) -> bytes:
    return _png_bytes(Image.fromarray(to_uint8(image), mode="RGBA"))


def mask_png_bytes(mask: np.ndarray) -> bytes:
    return _png_bytes(Image.fromarray(np.where(mask, 255, 0).astype(np.uint8), mode="L"))


def rgb_png_bytes(image: np.ndarray) -> bytes:
    return _png_bytes(Image.fromarray(to_uint8(image), mode="RGB"))


def provenance_palette() -> list[int]:
    """Palette for provenance PNGs: index 0 is empty (black), index code+1 is a role colour."""
    pal = [0, 0, 0]
    rng = np.random.default_rng(7)
    for _ in PatchRole:
        pal.extend(int(v) for v in rng.integers(40, 256, size=3))
    return pal + [0] * (768 - len(pal))


def provenance_png_bytes(provenance: np.ndarray) -> bytes:
    img = Image.fromarray((provenance.astype(np.int16) + 1).astype(np.uint8), mode="P")
    img.putpalette(provenance_palette())
    return _png_bytes(img)


def write_rgba_png(path: PathLike, image: np.ndarray) -> None:
    atomic_write_bytes(path, rgba_png_bytes(image))


def write_mask_png(path: PathLike, mask: np.ndarray) -> None:
    atomic_write_bytes(path, mask_png_bytes(mask))


def _open(path: PathLike) -> Image.Image:
    p = Path(path)
    if not p.is_file():
        raise InputError(p, "no such file")
    try:
        img = Image.open(p)
        img.load()
    except Exception as exc:  # Pillow raises a zoo of types
        raise InputError(p, f"not a readable PNG ({exc})") from exc
    return img


def read_rgba_png(path: PathLike) -> np.ndarray:
    img = _open(path).convert("RGBA")
    return np.asarray(img, dtype=np.float32) / 255.0


def read_mask_png(path: PathLike) -> np.ndarray:
    img = _open(path)
    if img.mode in ("RGBA", "LA"):
        img = img.getchannel("A")
    return np.asarray(img.convert("L")) >= 128


def read_provenance_png(path: PathLike) -> np.ndarray:
    return np.asarray(_open(path)).astype(np.int16) - 1


def pose_from_dict(doc: dict, path: PathLike = "<pose>", min_confidence: float = 0.1) -> PoseKeypoints:
    if not isinstance(doc, dict) or not isinstance(doc.get("keypoints"), dict):
        raise InputError(path, "expected an object with a 'keypoints' mapping")
    fmt = doc.get("format", "coco18")
    if fmt != "coco18":
        raise InputError(path, f"unsupported keypoint format {fmt!r}")
    joints = {}
    for name, val in doc["keypoints"].items():
        if name not in JOINT_NAMES:
            continue
        if (not isinstance(val, (list, tuple)) or len(val) != 3
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in val)):
            raise InputError(path, f"joint {name!r} must be [x, y, confidence]")
        x, y, c = (float(v) for v in val)
        if not (np.isfinite(x) and np.isfinite(y) and 0.0 <= c <= 1.0):
            raise InputError(path, f"joint {name!r} has invalid values {val}")
        joints[name] = (x, y, c)
    return PoseKeypoints(joints, min_confidence)


def read_pose_json(path: PathLike, min_confidence: float = 0.1) -> PoseKeypoints:
    p = Path(path)
    if not p.is_file():
        raise InputError(p, "no such file")
    try:
        doc = json.loads(p.read_text())
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise InputError(p, f"invalid JSON ({exc})") from exc
    return pose_from_dict(doc, p, min_confidence)


def write_pose_json(path: PathLike, pose: PoseKeypoints) -> None:
    atomic_write_bytes(path, (json.dumps(pose.to_json_dict(), indent=2) + "\n").encode())
