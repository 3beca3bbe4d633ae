"""Exception hierarchy shared by all patchwarp modules."""


class PatchWarpError(Exception):
    """Base class for every error raised by patchwarp."""


class GeometryError(PatchWarpError):
    pass


class DegenerateQuad(GeometryError):
    pass


class SingularSystem(GeometryError):
    pass


class SingularMatrix(GeometryError):
    pass


class PointAtInfinity(GeometryError):
    pass


class MissingJoint(GeometryError):
    def __init__(self, name: str, reason: str = "missing"):
        super().__init__(f"joint {name!r} is {reason}")
        self.name = name


class DegenerateLayout(GeometryError):
    def __init__(self, message: str, joints: tuple[str, ...] = ()):
        super().__init__(message)
        self.joints = joints


class RoleMismatch(PatchWarpError):
    pass


class DimensionMismatch(PatchWarpError, ValueError):
    pass


class ShapeMismatch(DimensionMismatch):
    pass


class EmptyAlignedRegion(PatchWarpError):
    pass
