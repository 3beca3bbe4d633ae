"""Random erasing of a warped garment to mimic self-occlusion during training.

Randomness comes from :class:`numpy.random.SeedSequence` with one spawned
child stream per decision::

    stream 0  -> arm-drop coin flip
    stream 1  -> which arm role to drop
    stream 2  -> free-form erase coin flip
    stream 3  -> stroke geometry

so changing stroke parameters never changes the arm-drop outcome.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .patching import WarpedGarment
from .roles import ARM_ROLES, ROLE_CODE, PatchRole

ALPHA1 = 0.2
ALPHA2 = 0.9

STREAM_ARM_FLIP, STREAM_ARM_PICK, STREAM_ERASE_FLIP, STREAM_STROKES = range(4)


@dataclass(frozen=True)
class EraseConfig:
    alpha1: float = ALPHA1
    alpha2: float = ALPHA2
    seed: int = 0
    stroke_count: tuple[int, int] = (1, 4)
    stroke_width: tuple[float, float] = (6.0, 24.0)
    stroke_vertices: tuple[int, int] = (4, 12)
    stroke_step: tuple[float, float] = (8.0, 32.0)

    def __post_init__(self):
        for name in ("alpha1", "alpha2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} is not a probability")
        for name in ("stroke_count", "stroke_width", "stroke_vertices", "stroke_step"):
            lo, hi = getattr(self, name)
            if lo > hi or lo < 0:
                raise ValueError(f"bad range {name}={(lo, hi)}")

    @classmethod
    def from_dict(cls, d: dict) -> "EraseConfig":
        kw = {k: (tuple(v) if isinstance(v, list) else v) for k, v in d.items()
              if k in cls.__dataclass_fields__}
        return cls(**kw)


def streams(seed: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(4)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


def free_form_mask(hw: tuple[int, int], rng: np.random.Generator, cfg: EraseConfig = EraseConfig()) -> np.ndarray:
    """Random-walk brush strokes rendered as swept discs (capsules between vertices)."""
    h, w = hw
    out = np.zeros(hw, dtype=bool)
    n_strokes = int(rng.integers(cfg.stroke_count[0], cfg.stroke_count[1] + 1))
    for _ in range(n_strokes):
        n_vert = int(rng.integers(cfg.stroke_vertices[0], cfg.stroke_vertices[1] + 1))
        radius = rng.uniform(*cfg.stroke_width) / 2
        x, y = rng.uniform(0, w), rng.uniform(0, h)
        pts = [(x, y)]
        for _ in range(n_vert - 1):
            ang = rng.uniform(0, 2 * np.pi)
            step = rng.uniform(*cfg.stroke_step)
            x = float(np.clip(x + step * np.cos(ang), 0, w - 1))
            y = float(np.clip(y + step * np.sin(ang), 0, h - 1))
            pts.append((x, y))
        for (ax, ay), (bx, by) in zip(pts[:-1], pts[1:]):
            _stamp_segment(out, ax, ay, bx, by, radius)
    return out


def _stamp_segment(out: np.ndarray, ax: float, ay: float, bx: float, by: float, r: float) -> None:
    h, w = out.shape
    x0 = max(int(np.floor(min(ax, bx) - r)), 0)
    x1 = min(int(np.ceil(max(ax, bx) + r)) + 1, w)
    y0 = max(int(np.floor(min(ay, by) - r)), 0)
    y1 = min(int(np.ceil(max(ay, by) + r)) + 1, h)
    if x0 >= x1 or y0 >= y1:
        return
    ys, xs = np.mgrid[y0:y1, x0:x1]
    px, py = xs + 0.5, ys + 0.5
    dx, dy = bx - ax, by - ay
    den = dx * dx + dy * dy
    t = np.zeros_like(px) if den == 0 else np.clip(((px - ax) * dx + (py - ay) * dy) / den, 0, 1)
    d2 = (px - ax - t * dx) ** 2 + (py - ay - t * dy) ** 2
    out[y0:y1, x0:x1] |= d2 <= r * r


@dataclass(frozen=True, eq=False)
class ErasePlan:
    dropped_role: Optional[PatchRole]
    arm_drop_fired: bool
    erase_fired: bool
    stroke_mask: Optional[np.ndarray]


def plan_erase(g: WarpedGarment, cfg: EraseConfig) -> ErasePlan:
    """Draw every random decision for ``random_erase`` without touching the garment."""
    s = streams(cfg.seed)
    arm_fired = bool(s[STREAM_ARM_FLIP].random() < cfg.alpha1)
    present = [r for r in ARM_ROLES if np.any(g.provenance == ROLE_CODE[r])]
    dropped = None
    if arm_fired and present:
        dropped = present[int(s[STREAM_ARM_PICK].integers(len(present)))]
    erase_fired = bool(s[STREAM_ERASE_FLIP].random() < cfg.alpha2)
    strokes = free_form_mask(g.mask.shape, s[STREAM_STROKES], cfg) if erase_fired else None
    return ErasePlan(dropped, arm_fired, erase_fired, strokes)


def apply_plan(g: WarpedGarment, plan: ErasePlan) -> WarpedGarment:
    remove = np.zeros(g.mask.shape, dtype=bool)
    if plan.dropped_role is not None:
        remove |= g.provenance == ROLE_CODE[plan.dropped_role]
    if plan.stroke_mask is not None:
        remove |= plan.stroke_mask
    out = g.copy()
    out.image[remove] = 0.0
    out.mask[remove] = False
    out.provenance[remove] = -1
    return out


def random_erase(g: WarpedGarment, cfg: EraseConfig = EraseConfig()) -> WarpedGarment:
    """Drop one arm patch with probability ``alpha1``, then erase free-form strokes with probability ``alpha2``."""
    return apply_plan(g, plan_erase(g, cfg))


def with_seed(cfg: EraseConfig, seed: int) -> EraseConfig:
    return replace(cfg, seed=seed)
