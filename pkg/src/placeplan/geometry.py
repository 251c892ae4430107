"""Planar poses, 3D points, rigid transforms and upright oriented boxes.

Everything downstream (scene synthesis, candidate pruning, execution) is
built on the primitives in this module.  Angles are radians and are kept
normalized to (-pi, pi]; distances are meters.  Boxes only rotate about
the vertical axis, which is all the upright robot-body and reach volumes
need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import GeometryError

TWO_PI = 2.0 * math.pi


class Frame(Enum):
    """Coordinate frame a pose or point is expressed in.

    MAP is the fixed world frame.  OBJECT is a pure translation of MAP to
    the target object's projected position (no rotation).  TABLE has its
    origin at the grid-aligned short-edge corner of the table with axes
    along the table edges.
    """

    MAP = "map"
    OBJECT = "object"
    TABLE = "table"


def normalize_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi].

    Uses IEEE remainder, so the result is exact up to one rounding of the
    reduction; -pi maps to +pi to keep the representation unique.
    """
    r = math.remainder(a, TWO_PI)
    return r if r > -math.pi else r + TWO_PI


@dataclass(frozen=True)
class Point3:
    """A 3D point in meters."""

    x: float
    y: float
    z: float
    frame: Frame = Frame.MAP

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise GeometryError(f"non-finite point ({self.x}, {self.y}, {self.z})")

    @property
    def xy(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class Pose2D:
    """A planar pose: position in meters plus heading in radians.

    The heading is normalized to (-pi, pi] on construction.
    """

    x: float
    y: float
    heading: float = 0.0
    frame: Frame = Frame.MAP

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.heading)):
            raise GeometryError(f"non-finite pose ({self.x}, {self.y}, {self.heading})")
        object.__setattr__(self, "heading", normalize_angle(self.heading))

    @property
    def xy(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class RigidTransform2D:
    """A planar rigid transform: rotate by `rotation`, then translate."""

    tx: float = 0.0
    ty: float = 0.0
    rotation: float = 0.0

    @classmethod
    def identity(cls) -> RigidTransform2D:
        return cls()

    @classmethod
    def translation(cls, tx: float, ty: float) -> RigidTransform2D:
        return cls(tx, ty, 0.0)

    def apply(self, x: float, y: float) -> tuple[float, float]:
        """Transform a bare point (no heading)."""
        c = math.cos(self.rotation)
        s = math.sin(self.rotation)
        return (self.tx + c * x - s * y, self.ty + s * x + c * y)

    def inverse(self) -> RigidTransform2D:
        c = math.cos(self.rotation)
        s = math.sin(self.rotation)
        # R(-rot) applied to -t
        return RigidTransform2D(-(c * self.tx + s * self.ty),
                                -(-s * self.tx + c * self.ty),
                                -self.rotation)

    def compose(self, other: RigidTransform2D) -> RigidTransform2D:
        """Return the transform equivalent to applying `other` first, then self."""
        x, y = self.apply(other.tx, other.ty)
        return RigidTransform2D(x, y, self.rotation + other.rotation)


def transform_pose(pose: Pose2D, T: RigidTransform2D, frame: Frame | None = None) -> Pose2D:
    """Apply a rigid transform to a pose, renormalizing the heading.

    `frame` retags the result; by default the input tag is carried over.
    """
    x, y = T.apply(pose.x, pose.y)
    return Pose2D(x, y, pose.heading + T.rotation,
                  frame=pose.frame if frame is None else frame)


def transform_point(x: float, y: float, T: RigidTransform2D) -> tuple[float, float]:
    return T.apply(x, y)


@dataclass(frozen=True)
class OrientedBox:
    """An upright box: center, half extents along local x/y/z, yaw about z.

    Containment is closed: points on a face, edge or corner count as
    inside.  Only yaw rotation is supported since every volume checked by
    the planner (robot body, reach corridor, obstacles) is upright.
    """

    center: Point3
    half_extents: tuple[float, float, float]
    yaw: float = 0.0

    def __post_init__(self) -> None:
        hx, hy, hz = self.half_extents
        if not (hx > 0 and hy > 0 and hz > 0):
            raise GeometryError(f"half extents must be positive, got {self.half_extents}")
        object.__setattr__(self, "yaw", normalize_angle(self.yaw))

    def contains(self, p: Point3) -> bool:
        return box_contains(self, p)

    def contains_points(self, pts: np.ndarray) -> np.ndarray:
        """Vectorized closed containment test for an (N, 3) float array."""
        c = math.cos(self.yaw)
        s = math.sin(self.yaw)
        dx = pts[:, 0] - self.center.x
        dy = pts[:, 1] - self.center.y
        dz = pts[:, 2] - self.center.z
        u = c * dx + s * dy
        v = -s * dx + c * dy
        hx, hy, hz = self.half_extents
        return (np.abs(u) <= hx) & (np.abs(v) <= hy) & (np.abs(dz) <= hz)

    def bottom_z(self) -> float:
        return self.center.z - self.half_extents[2]

    def top_z(self) -> float:
        return self.center.z + self.half_extents[2]

    def footprint_corners(self) -> list[tuple[float, float]]:
        """Ground-projected corners, counterclockwise."""
        c = math.cos(self.yaw)
        s = math.sin(self.yaw)
        hx, hy, _ = self.half_extents
        corners = []
        for sx, sy in ((1, 1), (-1, 1), (-1, -1), (1, -1)):
            lx, ly = sx * hx, sy * hy
            corners.append((self.center.x + c * lx - s * ly,
                            self.center.y + s * lx + c * ly))
        return corners

    def footprint_contains(self, x: float, y: float) -> bool:
        """Closed containment of a planar point in the ground projection."""
        c = math.cos(self.yaw)
        s = math.sin(self.yaw)
        dx = x - self.center.x
        dy = y - self.center.y
        u = c * dx + s * dy
        v = -s * dx + c * dy
        hx, hy, _ = self.half_extents
        return abs(u) <= hx and abs(v) <= hy


def box_contains(box: OrientedBox, p: Point3) -> bool:
    """Closed containment: |coords in box frame| <= half extents on all axes."""
    c = math.cos(box.yaw)
    s = math.sin(box.yaw)
    dx = p.x - box.center.x
    dy = p.y - box.center.y
    dz = p.z - box.center.z
    u = c * dx + s * dy
    v = -s * dx + c * dy
    hx, hy, hz = box.half_extents
    return abs(u) <= hx and abs(v) <= hy and abs(dz) <= hz


def heading_between(from_xy: tuple[float, float], to_xy: tuple[float, float]) -> float:
    """Heading of the vector from `from_xy` to `to_xy`."""
    return math.atan2(to_xy[1] - from_xy[1], to_xy[0] - from_xy[0])


def planar_distance(a: tuple[float, float], b: tuple[float, float]) -> float:
    return math.hypot(b[0] - a[0], b[1] - a[1])
