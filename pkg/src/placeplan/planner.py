"""Base placement candidate generation and collision-risk pruning.

Candidates are searched on radial rays around the target object's
projected position.  Each ray starts at the minimum reach distance and
steps outward by one footprint radius while a collision risk is
detected; the first risk-free standoff (still within maximum reach)
becomes that ray's candidate, facing the object.

A position carries collision risk when any of three checks trips:

* the robot-body box at the position contains more cloud points than
  the obstacle threshold,
* the reach corridor from the object to the position contains more
  cloud points than the threshold,
* the footprint circle covers an occupied grid cell.

Points belonging to the target object itself are carved out of both
point counts, otherwise the object would always disqualify its own
reach corridor.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Iterator

import numpy as np

from .errors import ConfigError, GeometryError, ParamError
from .geometry import (
    Frame,
    OrientedBox,
    Point3,
    Pose2D,
    RigidTransform2D,
    transform_pose,
)
from .scene import CellState, ObjectObservation, OccupancyGrid, PointCloud, SceneSnapshot

TWO_PI = 2.0 * math.pi

# Defaults sized for a compact one-armed service robot; pure configuration.
DEFAULT_FOOTPRINT_RADIUS = 0.25
DEFAULT_ROBOT_HEIGHT = 1.35
DEFAULT_REACH_MIN = 0.4
DEFAULT_REACH_MAX = 0.9
DEFAULT_OBSTACLE_POINT_THRESHOLD = 80


@dataclass(frozen=True)
class RobotParams:
    """Geometry and thresholds of the planning robot.

    angle_increment of 0 means "derive it from the footprint chord at
    minimum reach" (see default_angle_increment).
    """

    footprint_radius: float = DEFAULT_FOOTPRINT_RADIUS
    robot_height: float = DEFAULT_ROBOT_HEIGHT
    reach_min: float = DEFAULT_REACH_MIN
    reach_max: float = DEFAULT_REACH_MAX
    angle_increment: float = 0.0
    obstacle_point_threshold: int = DEFAULT_OBSTACLE_POINT_THRESHOLD

    def __post_init__(self) -> None:
        if self.footprint_radius <= 0:
            raise ParamError(f"footprint_radius must be positive, got {self.footprint_radius}")
        if self.robot_height <= 0:
            raise ParamError(f"robot_height must be positive, got {self.robot_height}")
        if not 0 < self.reach_min <= self.reach_max:
            raise ParamError(
                f"need 0 < reach_min <= reach_max, got {self.reach_min}, {self.reach_max}")
        if self.angle_increment < 0 or self.angle_increment > TWO_PI:
            raise ParamError(
                f"angle_increment must be 0 (use the chord default) or in (0, 2*pi], "
                f"got {self.angle_increment}")
        if self.obstacle_point_threshold < 0:
            raise ParamError(
                f"obstacle_point_threshold must be >= 0, got {self.obstacle_point_threshold}")

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> RobotParams:
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown parameter keys: {', '.join(sorted(unknown))}")
        kwargs = dict(doc)
        if "obstacle_point_threshold" in kwargs:
            kwargs["obstacle_point_threshold"] = int(kwargs["obstacle_point_threshold"])
        for key in ("footprint_radius", "robot_height", "reach_min", "reach_max",
                    "angle_increment"):
            if key in kwargs:
                kwargs[key] = float(kwargs[key])
        return cls(**kwargs)

    @classmethod
    def from_json(cls, text: str) -> RobotParams:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"parameter file is not valid JSON: {e}") from None
        if not isinstance(doc, dict):
            raise ConfigError("parameter file must hold a JSON object")
        return cls.from_dict(doc)


def default_angle_increment(params: RobotParams) -> float:
    """Angle whose chord at minimum reach equals the footprint diameter.

    Adjacent rays then start one robot width apart, so the ring of
    innermost candidates has no gaps and no overlap.
    """
    ratio = params.footprint_radius / (2.0 * params.reach_min)
    if ratio >= 1.0:
        raise ParamError(
            f"footprint_radius {params.footprint_radius} must be smaller than "
            f"2 * reach_min = {2.0 * params.reach_min}")
    return 2.0 * math.asin(ratio)


def resolve_angle_increment(params: RobotParams) -> float:
    return params.angle_increment if params.angle_increment > 0 else default_angle_increment(params)


@dataclass(frozen=True)
class RadialVectorSet:
    """Evenly spaced planar unit vectors around an origin point."""

    vectors: tuple[tuple[float, float], ...]
    origin: tuple[float, float]

    def __len__(self) -> int:
        return len(self.vectors)

    def heading(self, i: int) -> float:
        vx, vy = self.vectors[i]
        return math.atan2(vy, vx)


def generate_radial_vectors(object_position: Point3, theta: float) -> RadialVectorSet:
    """Unit vectors evenly spaced around the object's projected position.

    The requested increment is rounded to the nearest count that closes
    the circle: n = ceil(2*pi / theta), spaced exactly 2*pi / n.  The
    tiny slack absorbs float error when theta divides 2*pi.
    """
    if not 0 < theta <= TWO_PI:
        raise ParamError(f"angle increment out of (0, 2*pi]: {theta}")
    n = max(1, math.ceil(TWO_PI / theta - 1e-9))
    vectors = tuple((math.cos(TWO_PI * k / n), math.sin(TWO_PI * k / n)) for k in range(n))
    return RadialVectorSet(vectors=vectors, origin=(object_position.x, object_position.y))


@dataclass(frozen=True)
class PlacementCandidate:
    """One accepted base placement: map-frame pose facing the object."""

    pose: Pose2D
    radial_index: int
    standoff: float

    def to_dict(self) -> dict[str, Any]:
        return {"pose": {"x": self.pose.x, "y": self.pose.y, "heading": self.pose.heading},
                "radial_index": self.radial_index, "standoff": self.standoff}

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> PlacementCandidate:
        p = doc["pose"]
        return cls(pose=Pose2D(float(p["x"]), float(p["y"]), float(p["heading"])),
                   radial_index=int(doc["radial_index"]), standoff=float(doc["standoff"]))


@dataclass(frozen=True)
class PrunedProbe:
    """A rejected probe position, kept for diagnostics and rendering."""

    position: tuple[float, float]
    radial_index: int
    standoff: float
    reason: str


@dataclass(frozen=True)
class CandidateSet:
    """Ordered placement candidates, at most one per radial direction."""

    candidates: tuple[PlacementCandidate, ...]
    pruned: tuple[PrunedProbe, ...] = ()

    def __post_init__(self) -> None:
        indices = [c.radial_index for c in self.candidates]
        if len(indices) != len(set(indices)):
            raise GeometryError("duplicate radial index in candidate set")

    def __len__(self) -> int:
        return len(self.candidates)

    def __iter__(self) -> Iterator[PlacementCandidate]:
        return iter(self.candidates)

    def to_json(self) -> str:
        doc = {"candidates": [c.to_dict() for c in self.candidates],
               "pruned": [{"position": list(p.position), "radial_index": p.radial_index,
                           "standoff": p.standoff, "reason": p.reason}
                          for p in self.pruned]}
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> CandidateSet:
        doc = json.loads(text)
        candidates = tuple(PlacementCandidate.from_dict(c) for c in doc.get("candidates", []))
        pruned = tuple(PrunedProbe(position=(float(p["position"][0]), float(p["position"][1])),
                                   radial_index=int(p["radial_index"]),
                                   standoff=float(p["standoff"]), reason=str(p["reason"]))
                       for p in doc.get("pruned", []))
        return cls(candidates=candidates, pruned=pruned)


def body_box(candidate_position: tuple[float, float], heading: float,
             params: RobotParams) -> OrientedBox:
    """Box occupied by the robot body at a placement, aligned to its heading."""
    x, y = candidate_position
    r = params.footprint_radius
    h = params.robot_height
    return OrientedBox(center=Point3(x, y, h / 2.0),
                       half_extents=(r, r, h / 2.0), yaw=heading)


def reach_box(obj: ObjectObservation, candidate_position: tuple[float, float]) -> OrientedBox:
    """Corridor swept between the object and a placement at object height.

    Runs the full object-to-candidate segment; its cross-section is the
    detected object width and height.
    """
    ox, oy = obj.position.x, obj.position.y
    cx, cy = candidate_position
    dx, dy = cx - ox, cy - oy
    length = math.hypot(dx, dy)
    if length == 0.0:
        raise GeometryError("reach corridor undefined: candidate coincides with the object")
    return OrientedBox(center=Point3((ox + cx) / 2.0, (oy + cy) / 2.0, obj.position.z),
                       half_extents=(length / 2.0, obj.width / 2.0, obj.height / 2.0),
                       yaw=math.atan2(dy, dx))


# The object's surface points lie exactly on the exclusion faces; a hair of
# inflation keeps them excluded under float rounding.
EXCLUSION_EPS = 1e-9


def object_exclusion_box(obj: ObjectObservation) -> OrientedBox:
    """Box carving the target object's own points out of obstacle counts."""
    half = (obj.width / 2.0 + EXCLUSION_EPS,
            obj.width / 2.0 + EXCLUSION_EPS,
            obj.height / 2.0 + EXCLUSION_EPS)
    return OrientedBox(center=obj.position, half_extents=half, yaw=0.0)


def count_points_in_box(cloud: PointCloud, box: OrientedBox,
                        exclusion: OrientedBox | None = None) -> int:
    """Number of cloud points inside `box` but outside `exclusion`."""
    if len(cloud) == 0:
        return 0
    mask = box.contains_points(cloud.points)
    if exclusion is not None:
        mask &= ~exclusion.contains_points(cloud.points)
    return int(np.count_nonzero(mask))


def footprint_occupied(grid: OccupancyGrid, center: tuple[float, float], r_r: float,
                       treat_unknown_as_occupied: bool = True) -> bool:
    """Whether the footprint circle covers any occupied (or unknown) cell.

    A cell counts as covered when its center lies within r_r of the
    circle center.  Covered cells outside the grid bounds count as
    occupied, so a footprint poking off the known map is never declared
    safe.
    """
    if r_r <= 0:
        raise ParamError(f"footprint radius must be positive, got {r_r}")
    res = grid.resolution
    # circle center in grid coordinates (distances are rotation-invariant)
    c = math.cos(-grid.origin.heading)
    s = math.sin(-grid.origin.heading)
    dx = center[0] - grid.origin.x
    dy = center[1] - grid.origin.y
    gx = c * dx - s * dy
    gy = s * dx + c * dy

    ix_lo = int(math.floor((gx - r_r) / res))
    ix_hi = int(math.floor((gx + r_r) / res))
    iy_lo = int(math.floor((gy - r_r) / res))
    iy_hi = int(math.floor((gy + r_r) / res))

    ix = np.arange(ix_lo, ix_hi + 1)
    iy = np.arange(iy_lo, iy_hi + 1)
    cxs = (ix + 0.5) * res
    cys = (iy + 0.5) * res
    mx, my = np.meshgrid(cxs, cys)
    covered = (mx - gx) ** 2 + (my - gy) ** 2 <= r_r * r_r
    if not covered.any():
        return False

    mix, miy = np.meshgrid(ix, iy)
    inside = (mix >= 0) & (mix < grid.width) & (miy >= 0) & (miy < grid.height)
    if np.any(covered & ~inside):
        return True
    sel_ix = mix[covered]
    sel_iy = miy[covered]
    states = grid.cells[sel_iy, sel_ix]
    if np.any(states == np.int8(CellState.OCCUPIED)):
        return True
    if treat_unknown_as_occupied and np.any(states == np.int8(CellState.UNKNOWN)):
        return True
    return False


def has_collision_risk(candidate_position: tuple[float, float], params: RobotParams,
                       obj: ObjectObservation, snapshot: SceneSnapshot,
                       exclude_object_points: bool = True,
                       treat_unknown_as_occupied: bool = True) -> bool:
    """Run all three collision checks for one probe position."""
    heading = math.atan2(obj.position.y - candidate_position[1],
                         obj.position.x - candidate_position[0])
    exclusion = object_exclusion_box(obj) if exclude_object_points else None
    k = params.obstacle_point_threshold
    body = body_box(candidate_position, heading, params)
    if count_points_in_box(snapshot.cloud, body, exclusion) > k:
        return True
    corridor = reach_box(obj, candidate_position)
    if count_points_in_box(snapshot.cloud, corridor, exclusion) > k:
        return True
    return footprint_occupied(snapshot.grid, candidate_position, params.footprint_radius,
                              treat_unknown_as_occupied)


def _risk_reason(candidate_position: tuple[float, float], params: RobotParams,
                 obj: ObjectObservation, snapshot: SceneSnapshot,
                 exclude_object_points: bool, treat_unknown_as_occupied: bool) -> str | None:
    """Like has_collision_risk but names the first failing check."""
    heading = math.atan2(obj.position.y - candidate_position[1],
                         obj.position.x - candidate_position[0])
    exclusion = object_exclusion_box(obj) if exclude_object_points else None
    k = params.obstacle_point_threshold
    if count_points_in_box(snapshot.cloud, body_box(candidate_position, heading, params),
                           exclusion) > k:
        return "body_points"
    if count_points_in_box(snapshot.cloud, reach_box(obj, candidate_position), exclusion) > k:
        return "reach_points"
    if footprint_occupied(snapshot.grid, candidate_position, params.footprint_radius,
                          treat_unknown_as_occupied):
        return "footprint"
    return None


def plan_placements(snapshot: SceneSnapshot, params: RobotParams,
                    exclude_object_points: bool = True,
                    treat_unknown_as_occupied: bool = True,
                    keep_pruned: bool = False) -> CandidateSet:
    """Generate the set of risk-free base placements around the target.

    For each radial direction the standoffs reach_min, reach_min + r_r,
    reach_min + 2*r_r, ... (while <= reach_max) are probed in order and
    the first risk-free one is kept; directions with no risk-free
    standoff contribute nothing.  Work happens in the object frame (a
    pure translation of the map frame) and accepted poses are
    transformed back to the map frame, ordered by radial index.
    """
    obj = snapshot.object
    theta = resolve_angle_increment(params)
    rays = generate_radial_vectors(obj.position, theta)
    to_map = RigidTransform2D.translation(rays.origin[0], rays.origin[1])

    r_r = params.footprint_radius
    n_steps = int(math.floor((params.reach_max - params.reach_min) / r_r + 1e-9)) + 1

    candidates: list[PlacementCandidate] = []
    pruned: list[PrunedProbe] = []
    for i, (vx, vy) in enumerate(rays.vectors):
        for k in range(n_steps):
            standoff = params.reach_min + k * r_r
            # probe in the object frame, then place in the map frame
            local = Pose2D(standoff * vx, standoff * vy,
                           math.atan2(-vy, -vx), frame=Frame.OBJECT)
            pose = transform_pose(local, to_map, frame=Frame.MAP)
            position = (pose.x, pose.y)
            reason: str | None = None
            if keep_pruned:
                reason = _risk_reason(position, params, obj, snapshot,
                                      exclude_object_points, treat_unknown_as_occupied)
                risky = reason is not None
            else:
                risky = has_collision_risk(position, params, obj, snapshot,
                                           exclude_object_points, treat_unknown_as_occupied)
            if not risky:
                candidates.append(PlacementCandidate(pose=pose, radial_index=i,
                                                     standoff=standoff))
                break
            if keep_pruned:
                pruned.append(PrunedProbe(position=position, radial_index=i,
                                          standoff=standoff, reason=reason or ""))
    return CandidateSet(candidates=tuple(candidates), pruned=tuple(pruned))
