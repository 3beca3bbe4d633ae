"""Pose-driven patch layout, 64x64 patch normalisation, re-warping and stitching.

Coordinates are continuous image coordinates (see :mod:`patchwarp.raster`).
The person's left side is the ``l_*`` joints; for a front-facing person the
left shoulder therefore appears on the image right.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .errors import DegenerateLayout, DegenerateQuad, DimensionMismatch, MissingJoint, RoleMismatch
from .geometry import Homography, Point2, Quad, compose, estimate_homography, invert
from .raster import as_image, as_mask, check_same_hw, inverse_warp
from .roles import CODE_ROLE, ROLE_CODE, UPPER_ROLES, Z_RANK, PatchRole

TEMPLATE_SIZE = 64
TEMPLATE_QUAD = Quad.rect(0.0, 0.0, TEMPLATE_SIZE, TEMPLATE_SIZE)

JOINT_NAMES = (
    "nose", "neck",
    "l_shoulder", "r_shoulder", "l_elbow", "r_elbow", "l_wrist", "r_wrist",
    "l_hip", "r_hip", "l_knee", "r_knee", "l_ankle", "r_ankle",
)


class GarmentKind(str, Enum):
    UPPER = "upper"
    LOWER = "lower"
    FULL = "full"


@dataclass(frozen=True)
class Keypoint:
    point: Point2
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")


class PoseKeypoints(Mapping[str, Keypoint]):
    """Named body joints with confidences.

    Accepts ``{name: (x, y, confidence)}`` or ``{name: Keypoint}``; joint
    names outside :data:`JOINT_NAMES` are dropped.
    """

    def __init__(self, joints: Mapping[str, object], min_confidence: float = 0.1):
        parsed = {}
        for name, val in joints.items():
            if name not in JOINT_NAMES:
                continue
            if isinstance(val, Keypoint):
                parsed[name] = val
            else:
                x, y, c = val
                parsed[name] = Keypoint(Point2(x, y), float(c))
        self._joints = parsed
        self.min_confidence = float(min_confidence)

    def __getitem__(self, name: str) -> Keypoint:
        return self._joints[name]

    def __iter__(self):
        return iter(self._joints)

    def __len__(self) -> int:
        return len(self._joints)

    def __repr__(self) -> str:
        return f"PoseKeypoints({len(self)} joints)"

    def point(self, name: str) -> Point2:
        """The joint location, or :class:`MissingJoint` if absent or below ``min_confidence``."""
        kp = self._joints.get(name)
        if kp is None:
            raise MissingJoint(name)
        if kp.confidence < self.min_confidence:
            raise MissingJoint(name, f"below confidence {self.min_confidence} ({kp.confidence:g})")
        return kp.point

    def translated(self, dx: float, dy: float) -> "PoseKeypoints":
        return PoseKeypoints(
            {n: (k.point.x + dx, k.point.y + dy, k.confidence) for n, k in self._joints.items()},
            self.min_confidence,
        )

    def check_bounds(self, width: int, height: int, names: Optional[Iterable[str]] = None,
                     slack: float = 0.25) -> None:
        """Raise :class:`MissingJoint` for a joint further than ``slack`` x size outside the image."""
        for name in names if names is not None else self._joints:
            p = self.point(name)
            if not (-slack * width <= p.x <= (1 + slack) * width
                    and -slack * height <= p.y <= (1 + slack) * height):
                raise MissingJoint(name, f"out of image bounds at ({p.x:g}, {p.y:g})")

    def to_json_dict(self) -> dict:
        return {
            "format": "coco18",
            "keypoints": {n: [k.point.x, k.point.y, k.confidence] for n, k in self._joints.items()},
        }


@dataclass(frozen=True)
class LayoutParams:
    width_factor: float = 0.45
    neck_width: float = 0.6
    neck_height: float = 0.35
    hip_width: float = 0.5
    hip_height: float = 0.4
    waist_width: float = 1.2
    waist_height: float = 0.3


@dataclass(frozen=True)
class PatchLayout:
    entries: tuple[tuple[PatchRole, Quad], ...]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def roles(self) -> tuple[PatchRole, ...]:
        return tuple(r for r, _ in self.entries)

    def quad(self, role: PatchRole) -> Quad:
        for r, q in self.entries:
            if r == role:
                return q
        raise KeyError(role)

    def translated(self, dx: float, dy: float) -> "PatchLayout":
        return PatchLayout(tuple((r, q.translated(dx, dy)) for r, q in self.entries))


@dataclass(frozen=True, eq=False)
class NormalizedPatch:
    role: PatchRole
    pixels: np.ndarray      # (64, 64, 4) float32
    validity: np.ndarray    # (64, 64) bool
    homography: Optional[Homography] = None  # source -> template


@dataclass(frozen=True, eq=False)
class WarpedPatch:
    role: PatchRole
    image: np.ndarray
    validity: np.ndarray
    homography: Optional[Homography] = None  # template -> target


@dataclass(frozen=True, eq=False)
class WarpedGarment:
    image: np.ndarray       # (H, W, 4) float32
    mask: np.ndarray        # (H, W) bool
    provenance: np.ndarray  # (H, W) int16 role code, -1 off the mask

    def roles_present(self) -> set[PatchRole]:
        return {CODE_ROLE[int(c)] for c in np.unique(self.provenance) if c >= 0}

    def copy(self) -> "WarpedGarment":
        return WarpedGarment(self.image.copy(), self.mask.copy(), self.provenance.copy())


# --- layout construction ---------------------------------------------------

def _unit(dx: float, dy: float, what: str, joints: tuple[str, ...]) -> tuple[float, float]:
    n = math.hypot(dx, dy)
    if n < 1e-9:
        raise DegenerateLayout(f"{what}: joints {' and '.join(joints)} coincide", joints)
    return dx / n, dy / n


def limb_quad(a: Point2, b: Point2, width_factor: float = 0.45,
              role: Optional[PatchRole] = None) -> Quad:
    """Rectangle along segment a->b, ``width_factor * |ab|`` wide in total.

    The a-end forms the top edge: corners are a-p, b-p, b+p, a+p where p is the
    left normal scaled to half the width.
    """
    length = a.distance(b)
    ux, uy = (b.x - a.x) / length, (b.y - a.y) / length
    px, py = -uy, ux
    hw = 0.5 * width_factor * length
    return Quad.from_array([
        [a.x - hw * px, a.y - hw * py],
        [b.x - hw * px, b.y - hw * py],
        [b.x + hw * px, b.y + hw * py],
        [a.x + hw * px, a.y + hw * py],
    ], role)


def _frame_rect(origin: tuple[float, float], across: tuple[float, float], down: tuple[float, float],
                a0: float, a1: float, d0: float, d1: float, role: PatchRole) -> Quad:
    ox, oy = origin
    pts = []
    for a, d in ((a0, d0), (a1, d0), (a1, d1), (a0, d1)):
        pts.append([ox + a * across[0] + d * down[0], oy + a * across[1] + d * down[1]])
    return Quad.from_array(pts, role)


def _body_quad(tl: Point2, tr: Point2, br: Point2, bl: Point2, role: PatchRole) -> Quad:
    """Quad through four joints; mirrored left-right if the pose faces away from the camera."""
    try:
        return Quad((tl, tr, br, bl), role)
    except DegenerateQuad:
        return Quad((tr, tl, bl, br), role)


def _build(pose: PoseKeypoints, kind: GarmentKind, p: LayoutParams) -> list[tuple[PatchRole, Quad]]:
    out: list[tuple[PatchRole, Quad]] = []

    def limb(role, ja, jb):
        a, b = pose.point(ja), pose.point(jb)
        _unit(b.x - a.x, b.y - a.y, role.value, (ja, jb))
        out.append((role, limb_quad(a, b, p.width_factor, role)))

    if kind in (GarmentKind.UPPER, GarmentKind.FULL):
        ls, rs = pose.point("l_shoulder"), pose.point("r_shoulder")
        lh, rh = pose.point("l_hip"), pose.point("r_hip")
        sx, sy = _unit(ls.x - rs.x, ls.y - rs.y, "shoulder line", ("l_shoulder", "r_shoulder"))
        hx, hy = _unit(lh.x - rh.x, lh.y - rh.y, "hip line", ("l_hip", "r_hip"))
        smid = ((ls.x + rs.x) / 2, (ls.y + rs.y) / 2)
        hmid = ((lh.x + rh.x) / 2, (lh.y + rh.y) / 2)
        torso_h = math.hypot(hmid[0] - smid[0], hmid[1] - smid[1])
        dx, dy = _unit(hmid[0] - smid[0], hmid[1] - smid[1], "torso", ("shoulders", "hips"))
        # "across" is the body-frame x axis, chosen so (across, down) has positive winding.
        ax, ay = dy, -dx
        try:
            out.append((PatchRole.TORSO, _body_quad(rs, ls, lh, rh, PatchRole.TORSO)))
        except DegenerateQuad as exc:
            raise DegenerateLayout(f"torso: {exc}", ("l_shoulder", "r_shoulder", "l_hip", "r_hip"))

        neck = pose.point("neck")
        sd = ls.distance(rs)
        if sx * ax + sy * ay < 0:
            sx, sy = -sx, -sy
        out.append((PatchRole.NECK, _frame_rect(
            (neck.x, neck.y), (sx, sy), (-sy, sx),
            -0.5 * p.neck_width * sd, 0.5 * p.neck_width * sd,
            -0.5 * p.neck_height * sd, 0.5 * p.neck_height * sd, PatchRole.NECK)))
        limb(PatchRole.L_UPPER_ARM, "l_shoulder", "l_elbow")
        limb(PatchRole.R_UPPER_ARM, "r_shoulder", "r_elbow")
        limb(PatchRole.L_LOWER_ARM, "l_elbow", "l_wrist")
        limb(PatchRole.R_LOWER_ARM, "r_elbow", "r_wrist")
        hd = lh.distance(rh)
        if hx * ax + hy * ay < 0:
            hx, hy = -hx, -hy
        down = (-hy, hx)
        half = 0.5 * p.hip_width * hd
        height = p.hip_height * torso_h
        for role, joint in ((PatchRole.L_HIP, lh), (PatchRole.R_HIP, rh)):
            out.append((role, _frame_rect((joint.x, joint.y), (hx, hy), down,
                                          -half, half, 0.0, height, role)))

    if kind == GarmentKind.LOWER:
        lh, rh = pose.point("l_hip"), pose.point("r_hip")
        lk, rk = pose.point("l_knee"), pose.point("r_knee")
        hx, hy = _unit(lh.x - rh.x, lh.y - rh.y, "hip line", ("l_hip", "r_hip"))
        hmid = ((lh.x + rh.x) / 2, (lh.y + rh.y) / 2)
        kmid = ((lk.x + rk.x) / 2, (lk.y + rk.y) / 2)
        dx, dy = _unit(kmid[0] - hmid[0], kmid[1] - hmid[1], "seat", ("hips", "knees"))
        if hx * dy - hy * dx < 0:
            hx, hy = -hx, -hy
        hd = lh.distance(rh)
        out.append((PatchRole.WAIST, _frame_rect(
            hmid, (hx, hy), (-hy, hx),
            -0.5 * p.waist_width * hd, 0.5 * p.waist_width * hd,
            -0.5 * p.waist_height * hd, 0.5 * p.waist_height * hd, PatchRole.WAIST)))
        try:
            out.append((PatchRole.SEAT, _body_quad(rh, lh, lk, rk, PatchRole.SEAT)))
        except DegenerateQuad as exc:
            raise DegenerateLayout(f"seat: {exc}", ("l_hip", "r_hip", "l_knee", "r_knee"))

    if kind in (GarmentKind.LOWER, GarmentKind.FULL):
        limb(PatchRole.L_UPPER_LEG, "l_hip", "l_knee")
        limb(PatchRole.R_UPPER_LEG, "r_hip", "r_knee")
        limb(PatchRole.L_LOWER_LEG, "l_knee", "l_ankle")
        limb(PatchRole.R_LOWER_LEG, "r_knee", "r_ankle")
    return out


def build_patch_layout(pose: PoseKeypoints, garment_kind: Union[GarmentKind, str] = GarmentKind.UPPER,
                       params: LayoutParams = LayoutParams()) -> PatchLayout:
    """Quadrilateral patches anchored on the pose.

    ``upper`` yields the eight roles in :data:`~patchwarp.roles.UPPER_ROLES`
    order. ``lower`` (6 patches) and ``full`` (12 patches: upper plus four
    leg segments) are extensions built the same way.
    """
    kind = GarmentKind(garment_kind)
    try:
        entries = _build(pose, kind, params)
    except DegenerateQuad as exc:
        raise DegenerateLayout(str(exc)) from exc
    if kind == GarmentKind.UPPER:
        assert tuple(r for r, _ in entries) == UPPER_ROLES
    return PatchLayout(tuple(entries))


def layout_joints(kind: Union[GarmentKind, str]) -> tuple[str, ...]:
    kind = GarmentKind(kind)
    upper = ("neck", "l_shoulder", "r_shoulder", "l_elbow", "r_elbow", "l_wrist", "r_wrist", "l_hip", "r_hip")
    lower = ("l_hip", "r_hip", "l_knee", "r_knee", "l_ankle", "r_ankle")
    if kind == GarmentKind.UPPER:
        return upper
    if kind == GarmentKind.LOWER:
        return lower
    return upper + lower[2:]


# --- warping ---------------------------------------------------------------

def _bbox(q: Quad) -> tuple[int, int, int, int]:
    a = q.as_array()
    return (int(math.floor(a[:, 0].min())), int(math.floor(a[:, 1].min())),
            int(math.ceil(a[:, 0].max())) + 1, int(math.ceil(a[:, 1].max())) + 1)


def _centroid(q: Quad) -> tuple[float, float]:
    a = q.as_array().mean(axis=0)
    return float(a[0]), float(a[1])


def normalize_patch(garment: np.ndarray, garment_mask: np.ndarray, quad: Quad,
                    role: Optional[PatchRole] = None) -> NormalizedPatch:
    """Warp the region under ``quad`` onto the 64x64 template."""
    h_sn = estimate_homography(quad, TEMPLATE_QUAD)
    h_ns = invert(h_sn)
    pixels, validity = inverse_warp(
        garment, garment_mask, h_ns.m, (TEMPLATE_SIZE, TEMPLATE_SIZE),
        ref_point=(TEMPLATE_SIZE / 2, TEMPLATE_SIZE / 2),
    )
    return NormalizedPatch(role if role is not None else quad.role, pixels, validity, h_sn)


def extract_and_normalize(garment, garment_mask, layout: PatchLayout) -> list[NormalizedPatch]:
    garment = as_image(garment, "garment")
    garment_mask = as_mask(garment_mask, "garment_mask")
    check_same_hw(garment, garment_mask, "garment and garment_mask")
    return [normalize_patch(garment, garment_mask, quad, role) for role, quad in layout]


def render_patch(patch: NormalizedPatch, quad: Quad, canvas_hw: tuple[int, int]) -> WarpedPatch:
    """Warp a normalised patch onto ``quad`` of a canvas of size ``canvas_hw`` = (H, W)."""
    h_nt = estimate_homography(TEMPLATE_QUAD, quad)
    h_tn = invert(h_nt)
    image, validity = inverse_warp(
        patch.pixels, patch.validity, h_tn.m, canvas_hw,
        bbox=_bbox(quad), ref_point=_centroid(quad),
        src_domain=(0.0, 0.0, float(TEMPLATE_SIZE), float(TEMPLATE_SIZE)),
    )
    return WarpedPatch(patch.role, image, validity, h_nt)


def denormalize_patches(patches: Sequence[NormalizedPatch], target_layout: PatchLayout,
                        canvas_size: tuple[int, int]) -> list[WarpedPatch]:
    """Re-warp each normalised patch onto the same-role quad of ``target_layout``.

    ``canvas_size`` is (height, width).
    """
    if [p.role for p in patches] != list(target_layout.roles):
        raise RoleMismatch(
            f"patch roles {[str(p.role) for p in patches]} != layout roles "
            f"{[str(r) for r in target_layout.roles]}"
        )
    return [render_patch(p, q, canvas_size) for p, (_, q) in zip(patches, target_layout)]


def stitch(warped: Sequence[WarpedPatch]) -> WarpedGarment:
    """Composite warped patches back to front in the fixed z-order; later roles win."""
    if not warped:
        raise ValueError("nothing to stitch")
    hw = warped[0].image.shape[:2]
    for w in warped:
        if w.image.shape[:2] != hw or w.validity.shape != hw:
            raise DimensionMismatch("warped patches must share canvas dimensions")
    image = np.zeros(hw + (4,), dtype=np.float32)
    prov = np.full(hw, -1, dtype=np.int16)
    order = sorted(range(len(warped)), key=lambda i: (Z_RANK[warped[i].role], i))
    for i in order:
        w = warped[i]
        image[w.validity] = w.image[w.validity]
        prov[w.validity] = ROLE_CODE[w.role]
    mask = prov >= 0
    return WarpedGarment(image, mask, prov)


@dataclass(frozen=True, eq=False)
class WarpResult:
    garment: WarpedGarment
    patches: list[NormalizedPatch]
    warped: list[WarpedPatch] = field(default_factory=list)
    source_layout: Optional[PatchLayout] = None
    target_layout: Optional[PatchLayout] = None

    def __iter__(self):
        # unpacks as (garment, patches)
        yield self.garment
        yield self.patches

    def combined_homographies(self) -> dict[PatchRole, Homography]:
        """Per-role source -> target map, template-to-target after source-to-template."""
        return {p.role: compose(w.homography, p.homography) for p, w in zip(self.patches, self.warped)}


def warp_garment(source, source_mask, source_pose: PoseKeypoints, target_pose: PoseKeypoints,
                 kind: Union[GarmentKind, str] = GarmentKind.UPPER,
                 params: LayoutParams = LayoutParams(),
                 canvas_size: Optional[tuple[int, int]] = None) -> WarpResult:
    """Layout, normalise, re-warp to the target pose and stitch.

    The canvas defaults to the source image size.
    """
    source = as_image(source, "source")
    source_mask = as_mask(source_mask, "source_mask")
    check_same_hw(source, source_mask, "source and source_mask")
    src_layout = build_patch_layout(source_pose, kind, params)
    dst_layout = build_patch_layout(target_pose, kind, params)
    patches = extract_and_normalize(source, source_mask, src_layout)
    hw = tuple(canvas_size) if canvas_size is not None else source.shape[:2]
    warped = denormalize_patches(patches, dst_layout, hw)
    return WarpResult(stitch(warped), patches, warped, src_layout, dst_layout)


def quad_union_mask(layout: PatchLayout, hw: tuple[int, int]) -> np.ndarray:
    """Pixels whose centre lies inside at least one layout quad."""
    h, w = hw
    ys, xs = np.mgrid[0:h, 0:w]
    px, py = xs + 0.5, ys + 0.5
    out = np.zeros(hw, dtype=bool)
    for _, q in layout:
        out |= point_in_quad(q, px, py)
    return out


def point_in_quad(q: Quad, px: np.ndarray, py: np.ndarray) -> np.ndarray:
    """Even-odd test, so non-convex quads work too."""
    a = q.as_array()
    inside = np.zeros(np.shape(px), dtype=bool)
    for i in range(4):
        x0, y0 = a[i]
        x1, y1 = a[(i + 1) % 4]
        crosses = (y0 > py) != (y1 > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = x0 + (py - y0) * (x1 - x0) / (y1 - y0)
        inside ^= crosses & (px < xint)
    return inside
