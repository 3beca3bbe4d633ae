"""Patch roles and the fixed compositing order used when stitching."""
from enum import Enum


class PatchRole(str, Enum):
    TORSO = "torso"
    NECK = "neck"
    L_UPPER_ARM = "l_upper_arm"
    R_UPPER_ARM = "r_upper_arm"
    L_LOWER_ARM = "l_lower_arm"
    R_LOWER_ARM = "r_lower_arm"
    L_HIP = "l_hip"
    R_HIP = "r_hip"
    # lower-body extension
    WAIST = "waist"
    SEAT = "seat"
    L_UPPER_LEG = "l_upper_leg"
    R_UPPER_LEG = "r_upper_leg"
    L_LOWER_LEG = "l_lower_leg"
    R_LOWER_LEG = "r_lower_leg"

    def __str__(self) -> str:
        return self.value


UPPER_ROLES = (
    PatchRole.TORSO,
    PatchRole.NECK,
    PatchRole.L_UPPER_ARM,
    PatchRole.R_UPPER_ARM,
    PatchRole.L_LOWER_ARM,
    PatchRole.R_LOWER_ARM,
    PatchRole.L_HIP,
    PatchRole.R_HIP,
)

LOWER_ROLES = (
    PatchRole.WAIST,
    PatchRole.SEAT,
    PatchRole.L_UPPER_LEG,
    PatchRole.R_UPPER_LEG,
    PatchRole.L_LOWER_LEG,
    PatchRole.R_LOWER_LEG,
)

ARM_ROLES = (
    PatchRole.L_UPPER_ARM,
    PatchRole.R_UPPER_ARM,
    PatchRole.L_LOWER_ARM,
    PatchRole.R_LOWER_ARM,
)

# Back to front; later roles overwrite earlier ones.
Z_ORDER = (
    PatchRole.TORSO,
    PatchRole.SEAT,
    PatchRole.WAIST,
    PatchRole.L_HIP,
    PatchRole.R_HIP,
    PatchRole.L_UPPER_LEG,
    PatchRole.R_UPPER_LEG,
    PatchRole.L_LOWER_LEG,
    PatchRole.R_LOWER_LEG,
    PatchRole.L_UPPER_ARM,
    PatchRole.R_UPPER_ARM,
    PatchRole.L_LOWER_ARM,
    PatchRole.R_LOWER_ARM,
    PatchRole.NECK,
)

Z_RANK = {role: rank for rank, role in enumerate(Z_ORDER)}

# Stable integer codes for provenance maps; -1 marks empty pixels.
ROLE_CODE = {role: code for code, role in enumerate(PatchRole)}
CODE_ROLE = {code: role for role, code in ROLE_CODE.items()}
