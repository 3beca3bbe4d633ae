"""Points, quadrilaterals and exact four-point homographies.

All scalar geometry is carried in float64. A homography is stored with the
convention ``m[2, 2] == 1`` whenever ``|m[2, 2]| > 1e-9``; otherwise the matrix
is scaled to unit Frobenius norm and ``frobenius`` is set.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import DegenerateQuad, PointAtInfinity, SingularMatrix, SingularSystem
from .roles import PatchRole

AREA_EPS = 1e-9
H33_EPS = 1e-9
DET_EPS = 1e-12
W_EPS = 1e-12
FIT_TOL = 1e-6


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")

    def __iter__(self) -> Iterator[float]:
        yield self.x
        yield self.y

    def __sub__(self, other: "Point2") -> "Point2":
        return Point2(self.x - other.x, self.y - other.y)

    def __add__(self, other: "Point2") -> "Point2":
        return Point2(self.x + other.x, self.y + other.y)

    def distance(self, other: "Point2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def signed_area(corners: Sequence[Sequence[float]]) -> float:
    """Shoelace area; positive for TL, TR, BR, BL winding in y-down image coordinates."""
    s = 0.0
    n = len(corners)
    for i in range(n):
        x0, y0 = corners[i]
        x1, y1 = corners[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


@dataclass(frozen=True)
class Quad:
    """Four corners ordered top-left, top-right, bottom-right, bottom-left."""

    corners: tuple[Point2, Point2, Point2, Point2]
    role: Optional[PatchRole] = None

    def __post_init__(self):
        pts = tuple(p if isinstance(p, Point2) else Point2(*p) for p in self.corners)
        if len(pts) != 4:
            raise DegenerateQuad(f"a quad needs 4 corners, got {len(pts)}")
        object.__setattr__(self, "corners", pts)
        area = signed_area([tuple(p) for p in pts])
        if not area > AREA_EPS:
            raise DegenerateQuad(f"quad signed area {area:.3g} is not positive")
        for i in range(4):
            a, b, c = pts[i], pts[(i + 1) % 4], pts[(i + 2) % 4]
            if abs(0.5 * _cross(tuple(a), tuple(b), tuple(c))) < AREA_EPS:
                raise DegenerateQuad(f"corners {i}, {(i + 1) % 4}, {(i + 2) % 4} are collinear")

    @classmethod
    def from_array(cls, arr, role: Optional[PatchRole] = None) -> "Quad":
        arr = np.asarray(arr, dtype=np.float64).reshape(4, 2)
        return cls(tuple(Point2(x, y) for x, y in arr), role)

    @classmethod
    def rect(cls, x0: float, y0: float, width: float, height: float,
             role: Optional[PatchRole] = None) -> "Quad":
        return cls.from_array(
            [[x0, y0], [x0 + width, y0], [x0 + width, y0 + height], [x0, y0 + height]], role
        )

    def as_array(self) -> np.ndarray:
        return np.array([[p.x, p.y] for p in self.corners], dtype=np.float64)

    @property
    def area(self) -> float:
        return signed_area([tuple(p) for p in self.corners])

    def with_role(self, role: Optional[PatchRole]) -> "Quad":
        return Quad(self.corners, role)

    def translated(self, dx: float, dy: float) -> "Quad":
        return Quad.from_array(self.as_array() + [dx, dy], self.role)


def _normalize_matrix(m: np.ndarray) -> tuple[np.ndarray, bool]:
    m = np.array(m, dtype=np.float64).reshape(3, 3)
    if not np.all(np.isfinite(m)):
        raise SingularMatrix("homography has non-finite entries")
    if abs(m[2, 2]) > H33_EPS:
        return m / m[2, 2], False
    norm = np.linalg.norm(m)
    if norm == 0.0:
        raise SingularMatrix("zero matrix")
    # fix the sign so the first nonzero entry is positive
    flat = m.ravel()
    sign = np.sign(flat[np.flatnonzero(np.abs(flat) > 0)[0]])
    return sign * m / norm, True


@dataclass(frozen=True, eq=False)
class Homography:
    m: np.ndarray
    frobenius: bool = field(default=False)

    def __post_init__(self):
        m, frob = _normalize_matrix(self.m)
        if abs(np.linalg.det(m)) <= DET_EPS:
            raise SingularMatrix(f"|det| = {abs(np.linalg.det(m)):.3g} <= {DET_EPS}")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "frobenius", frob)

    @classmethod
    def identity(cls) -> "Homography":
        return cls(np.eye(3))

    @classmethod
    def translation(cls, dx: float, dy: float) -> "Homography":
        return cls(np.array([[1.0, 0.0, dx], [0.0, 1.0, dy], [0.0, 0.0, 1.0]]))

    def __matmul__(self, other: "Homography") -> "Homography":
        return compose(self, other)

    def __call__(self, p: Point2) -> Point2:
        return apply_homography(self, p)

    def allclose(self, other: "Homography", atol: float = 1e-9) -> bool:
        return bool(np.allclose(self.m, other.m, atol=atol, rtol=0))

    def tolist(self) -> list[float]:
        return [float(v) for v in self.m.ravel()]

    def __repr__(self) -> str:
        rows = "; ".join(" ".join(f"{v:.6g}" for v in row) for row in self.m)
        return f"Homography([{rows}])"


def _hartley(pts: np.ndarray) -> np.ndarray:
    """Similarity moving the centroid to 0 and the mean distance to sqrt(2)."""
    c = pts.mean(axis=0)
    d = np.sqrt(((pts - c) ** 2).sum(axis=1)).mean()
    s = math.sqrt(2.0) / d
    return np.array([[s, 0.0, -s * c[0]], [0.0, s, -s * c[1]], [0.0, 0.0, 1.0]])


def _dlt_rows(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    a = np.zeros((8, 9))
    for i, ((x, y), (u, v)) in enumerate(zip(src, dst)):
        a[2 * i] = [x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y, -u]
        a[2 * i + 1] = [0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y, -v]
    return a


def estimate_homography(src: Quad, dst: Quad) -> Homography:
    """Exact homography taking the four corners of ``src`` onto those of ``dst``.

    Four correspondences determine the eight unknowns, so the DLT system is
    solved directly (after Hartley conditioning) instead of iteratively.
    Falls back to the SVD null vector when the ``h33 = 1`` system is singular.
    """
    for q in (src, dst):
        if not isinstance(q, Quad):
            raise TypeError(f"expected Quad, got {type(q).__name__}")
    s = src.as_array()
    d = dst.as_array()
    ts, td = _hartley(s), _hartley(d)
    sn = (ts[:2, :2] @ s.T).T + ts[:2, 2]
    dn = (td[:2, :2] @ d.T).T + td[:2, 2]
    a = _dlt_rows(sn, dn)
    try:
        h = np.linalg.solve(a[:, :8], -a[:, 8])
        hn = np.append(h, 1.0).reshape(3, 3)
        if not np.all(np.isfinite(hn)) or np.linalg.cond(a[:, :8]) > 1e12:
            raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        _, sv, vt = np.linalg.svd(a)
        if sv[-2] < 1e-12 * sv[0]:
            raise SingularSystem("DLT system has a rank deficiency")
        hn = vt[-1].reshape(3, 3)
    m = np.linalg.solve(td, hn @ ts)
    try:
        H = Homography(m)
    except SingularMatrix as exc:
        raise SingularSystem(str(exc)) from exc
    mapped = map_points(H, s)
    err = np.abs(mapped - d).max()
    if not err <= FIT_TOL:
        raise SingularSystem(f"corner residual {err:.3g} px exceeds {FIT_TOL}")
    return H


def map_points(H: Homography, pts) -> np.ndarray:
    """Vectorised :func:`apply_homography` over an ``(N, 2)`` array."""
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 2)
    m = H.m
    w = m[2, 0] * pts[:, 0] + m[2, 1] * pts[:, 1] + m[2, 2]
    if np.any(np.abs(w) <= W_EPS):
        raise PointAtInfinity("a point maps to the line at infinity")
    x = (m[0, 0] * pts[:, 0] + m[0, 1] * pts[:, 1] + m[0, 2]) / w
    y = (m[1, 0] * pts[:, 0] + m[1, 1] * pts[:, 1] + m[1, 2]) / w
    return np.stack([x, y], axis=1)


def apply_homography(H: Homography, p: Point2) -> Point2:
    m = H.m
    x, y = p.x, p.y
    w = m[2, 0] * x + m[2, 1] * y + m[2, 2]
    if abs(w) <= W_EPS:
        raise PointAtInfinity(f"({x}, {y}) maps to the line at infinity")
    return Point2(
        (m[0, 0] * x + m[0, 1] * y + m[0, 2]) / w,
        (m[1, 0] * x + m[1, 1] * y + m[1, 2]) / w,
    )


def invert(H: Homography) -> Homography:
    try:
        inv = np.linalg.inv(H.m)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix(str(exc)) from exc
    return Homography(inv)


def compose(second: Homography, first: Homography) -> Homography:
    """The map ``p -> second(first(p))``."""
    return Homography(second.m @ first.m)

