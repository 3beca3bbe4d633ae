"""Patch-routed garment warping: pose-driven patch normalisation through
homographies, re-warping to a target pose, misalignment inpainting and
spatially-adaptive feature modulation."""

from .alignment import AlignmentMasks, compute_alignment, inpaint_features, mask_garment
from .augmentation import EraseConfig, random_erase
from .errors import (
    DegenerateLayout,
    DegenerateQuad,
    DimensionMismatch,
    EmptyAlignedRegion,
    MissingJoint,
    PatchWarpError,
    PointAtInfinity,
    RoleMismatch,
    ShapeMismatch,
    SingularMatrix,
    SingularSystem,
)
from .geometry import Homography, Point2, Quad, apply_homography, compose, estimate_homography, invert
from .metrics import LossWeights, l1_loss, mask_loss, perceptual_loss, reconstruction_loss, total_loss
from .modulation import (
    AffineParams,
    ConvParams,
    affine_from_features,
    channel_stats,
    spade_backward,
    spade_modulate,
)
from .patching import (
    GarmentKind,
    NormalizedPatch,
    PatchLayout,
    PoseKeypoints,
    WarpedGarment,
    build_patch_layout,
    denormalize_patches,
    extract_and_normalize,
    stitch,
    warp_garment,
)
from .roles import PatchRole

__version__ = "0.1.0"
