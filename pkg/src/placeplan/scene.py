"""Scene description, occupancy grids, point clouds and their synthesis.

A declarative scene (table + objects + obstacles) is the single source
from which the point cloud, the occupancy grid and the object
observation are generated, so an experiment is reproducible from one
JSON file.  The synthesized cloud stands in for a back-projected RGB-D
capture; the grid stands in for a static navigation map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .errors import GeometryError
from .geometry import OrientedBox, Point3, Pose2D, RigidTransform2D

DEFAULT_DENSITY = 2000.0     # cloud points per square meter of surface
DEFAULT_RESOLUTION = 0.05    # occupancy grid cell edge, meters
DEFAULT_MARGIN = 1.0         # free border synthesized around the scene, meters


class CellState(IntEnum):
    """Tri-state occupancy of one grid cell."""

    FREE = 0
    OCCUPIED = 1
    UNKNOWN = -1


@dataclass
class OccupancyGrid:
    """A 2D occupancy grid over the map frame.

    `origin` is the map-frame pose of the outer corner of cell (0, 0);
    the grid x axis runs along columns and y along rows.  `cells` is an
    int8 array of shape (height, width) holding CellState values and is
    indexed cells[iy, ix].
    """

    resolution: float
    origin: Pose2D
    width: int
    height: int
    cells: np.ndarray

    def __post_init__(self) -> None:
        if self.resolution <= 0:
            raise GeometryError(f"resolution must be positive, got {self.resolution}")
        self.cells = np.asarray(self.cells, dtype=np.int8)
        if self.cells.shape != (self.height, self.width):
            raise GeometryError(
                f"cells shape {self.cells.shape} != (height, width) = "
                f"({self.height}, {self.width})")

    def world_to_cell(self, x: float, y: float) -> tuple[int, int]:
        """Map-frame point to (ix, iy) indices; may be out of bounds."""
        c = math.cos(-self.origin.heading)
        s = math.sin(-self.origin.heading)
        dx = x - self.origin.x
        dy = y - self.origin.y
        gx = c * dx - s * dy
        gy = s * dx + c * dy
        return (int(math.floor(gx / self.resolution)),
                int(math.floor(gy / self.resolution)))

    def cell_to_world(self, ix: int, iy: int) -> tuple[float, float]:
        """Map-frame center of cell (ix, iy)."""
        gx = (ix + 0.5) * self.resolution
        gy = (iy + 0.5) * self.resolution
        c = math.cos(self.origin.heading)
        s = math.sin(self.origin.heading)
        return (self.origin.x + c * gx - s * gy,
                self.origin.y + s * gx + c * gy)

    def in_bounds(self, ix: int, iy: int) -> bool:
        return 0 <= ix < self.width and 0 <= iy < self.height

    def state_at(self, ix: int, iy: int) -> CellState:
        return CellState(int(self.cells[iy, ix]))


@dataclass
class PointCloud:
    """Map-frame 3D points stored as an (N, 3) float64 array."""

    points: np.ndarray

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.size == 0:
            pts = pts.reshape(0, 3)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise GeometryError(f"point cloud must be (N, 3), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise GeometryError("point cloud contains non-finite values")
        self.points = pts

    def __len__(self) -> int:
        return self.points.shape[0]

    @classmethod
    def empty(cls) -> PointCloud:
        return cls(np.zeros((0, 3)))

    def point(self, i: int) -> Point3:
        x, y, z = self.points[i]
        return Point3(float(x), float(y), float(z))


@dataclass(frozen=True)
class ObjectObservation:
    """Estimated target object: map-frame centroid plus detected extents."""

    position: Point3
    width: float
    height: float

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise GeometryError(
                f"object extents must be positive, got w={self.width} h={self.height}")
        if self.position.z < 0:
            raise GeometryError(f"object centroid below ground: z={self.position.z}")


@dataclass(frozen=True)
class TableSpec:
    """Rectangular table: center pose, top size, and top height above floor.

    The local x axis (rotated by center.heading) runs along the short
    edge (width); local y runs along the long edge (length).
    """

    center: Pose2D
    length: float
    width: float
    height: float


def table_corner_transform(table: TableSpec) -> RigidTransform2D:
    """Transform from the table frame to the map frame.

    The table frame origin is the short-edge corner the cell grid is
    aligned with; x runs along the short edge, y along the long edge.
    """
    c = math.cos(table.center.heading)
    s = math.sin(table.center.heading)
    hx, hy = table.width / 2.0, table.length / 2.0
    corner_x = table.center.x - (c * hx - s * hy)
    corner_y = table.center.y - (s * hx + c * hy)
    return RigidTransform2D(corner_x, corner_y, table.center.heading)


@dataclass(frozen=True)
class ObjectSpec:
    """A box-shaped object resting on the table top.

    `position` is the planar center in the table frame; the base sits at
    the table top, so the centroid is at table height + height / 2.
    Width extends along table x, depth along table y.
    """

    id: str
    position: tuple[float, float]
    width: float
    height: float
    depth: float


@dataclass(frozen=True)
class SceneDescription:
    """Declarative scene: one table, objects on it, free-standing obstacles.

    Obstacle boxes are given directly in the map frame.
    """

    table: TableSpec
    objects: tuple[ObjectSpec, ...]
    obstacles: tuple[OrientedBox, ...] = ()
    robot_start: Pose2D = Pose2D(0.0, 0.0, 0.0)
    target_id: str = ""

    def __post_init__(self) -> None:
        if self.target_id and self.target_id not in {o.id for o in self.objects}:
            raise LookupError(f"target_id {self.target_id!r} is not among scene objects")

    def table_to_map(self) -> RigidTransform2D:
        """Transform from the table frame (short-edge corner) to the map frame."""
        return table_corner_transform(self.table)

    def find_object(self, object_id: str) -> ObjectSpec:
        for obj in self.objects:
            if obj.id == object_id:
                return obj
        raise LookupError(f"unknown object id {object_id!r}")

    def object_box(self, obj: ObjectSpec) -> OrientedBox:
        """Map-frame box occupied by an on-table object."""
        T = self.table_to_map()
        cx, cy = T.apply(obj.position[0], obj.position[1])
        cz = self.table.height + obj.height / 2.0
        return OrientedBox(center=Point3(cx, cy, cz),
                           half_extents=(obj.width / 2.0, obj.depth / 2.0, obj.height / 2.0),
                           yaw=self.table.center.heading)

    def table_box(self) -> OrientedBox:
        """Map-frame box of the table slab from the floor to the top."""
        t = self.table
        return OrientedBox(center=Point3(t.center.x, t.center.y, t.height / 2.0),
                           half_extents=(t.width / 2.0, t.length / 2.0, t.height / 2.0),
                           yaw=t.center.heading)


@dataclass(frozen=True)
class SceneSnapshot:
    """The planner's inputs bundled: cloud, grid, target observation."""

    cloud: PointCloud
    grid: OccupancyGrid
    object: ObjectObservation

    def __post_init__(self) -> None:
        ix, iy = self.grid.world_to_cell(self.object.position.x, self.object.position.y)
        if not self.grid.in_bounds(ix, iy):
            raise GeometryError("grid does not cover the object's projected position")


def observe_object(scene: SceneDescription) -> ObjectObservation:
    """Simulated perception: map-frame centroid and detected extents of the target.

    The centroid sits half the object height above the table top, which is
    where the reach corridor is anchored.
    """
    obj = scene.find_object(scene.target_id)
    T = scene.table_to_map()
    mx, my = T.apply(obj.position[0], obj.position[1])
    cz = scene.table.height + obj.height / 2.0
    return ObjectObservation(position=Point3(mx, my, cz), width=obj.width, height=obj.height)


@dataclass(frozen=True)
class _Face:
    """One planar rectangle to sample: origin corner plus two edge vectors."""

    origin: tuple[float, float, float]
    u_dir: tuple[float, float, float]   # unit
    v_dir: tuple[float, float, float]   # unit
    u_len: float
    v_len: float

    @property
    def area(self) -> float:
        return self.u_len * self.v_len


def _box_faces(box: OrientedBox, sides: bool = True, top: bool = True,
               bottom: bool = True) -> list[_Face]:
    """Faces of an upright box in a fixed order (+x, -x, +y, -y, top, bottom)."""
    c = math.cos(box.yaw)
    s = math.sin(box.yaw)
    hx, hy, hz = box.half_extents
    xdir = (c, s, 0.0)
    ydir = (-s, c, 0.0)
    zdir = (0.0, 0.0, 1.0)
    cx, cy, cz = box.center.x, box.center.y, box.center.z

    def corner(lx: float, ly: float, lz: float) -> tuple[float, float, float]:
        return (cx + c * lx - s * ly, cy + s * lx + c * ly, cz + lz)

    faces = []
    if sides:
        neg = lambda d: (-d[0], -d[1], -d[2])
        faces.append(_Face(corner(hx, -hy, -hz), ydir, zdir, 2 * hy, 2 * hz))      # +x
        faces.append(_Face(corner(-hx, hy, -hz), neg(ydir), zdir, 2 * hy, 2 * hz))  # -x
        faces.append(_Face(corner(hx, hy, -hz), neg(xdir), zdir, 2 * hx, 2 * hz))   # +y
        faces.append(_Face(corner(-hx, -hy, -hz), xdir, zdir, 2 * hx, 2 * hz))      # -y
    if top:
        faces.append(_Face(corner(-hx, -hy, hz), xdir, ydir, 2 * hx, 2 * hy))
    if bottom:
        faces.append(_Face(corner(-hx, -hy, -hz), xdir, ydir, 2 * hx, 2 * hy))
    return faces


def _scene_faces(scene: SceneDescription) -> list[_Face]:
    """All sampled faces in a deterministic order.

    The table contributes only its top; objects contribute four sides and
    the top (they rest on the table); obstacles contribute all six faces.
    A degenerate zero-area table contributes nothing.
    """
    faces = []
    if scene.table.width > 0 and scene.table.length > 0:
        faces.extend(_box_faces(scene.table_box(), sides=False, top=True, bottom=False))
    for obj in scene.objects:
        faces.extend(_box_faces(scene.object_box(obj), sides=True, top=True, bottom=False))
    for obs in scene.obstacles:
        faces.extend(_box_faces(obs, sides=True, top=True, bottom=True))
    return faces


def _sample_face(face: _Face, n: int, rng: np.random.Generator) -> np.ndarray:
    """n stratified points on a face: jittered grid, row-major fill."""
    if n <= 0:
        return np.zeros((0, 3))
    aspect = face.u_len / face.v_len if face.v_len > 0 else float(n)
    nu = max(1, int(math.ceil(math.sqrt(n * aspect))))
    nv = max(1, int(math.ceil(n / nu)))
    k = np.arange(n)
    iu = k % nu
    iv = k // nu
    jitter = rng.random((n, 2))
    u = (iu + jitter[:, 0]) * (face.u_len / nu)
    v = (iv + jitter[:, 1]) * (face.v_len / nv)
    o = np.asarray(face.origin)
    ud = np.asarray(face.u_dir)
    vd = np.asarray(face.v_dir)
    return o + u[:, None] * ud + v[:, None] * vd


def synthesize_cloud(scene: SceneDescription, density: float = DEFAULT_DENSITY,
                     seed: int = 0) -> PointCloud:
    """Sample the scene's surfaces into a map-frame point cloud.

    Each face receives floor(density * area) points, placed by a jittered
    grid so local counts stay close to the expectation.  Identical
    (scene, density, seed) inputs give an identical cloud.
    """
    if density <= 0:
        raise GeometryError(f"density must be positive, got {density}")
    rng = np.random.default_rng(seed)
    chunks = []
    for face in _scene_faces(scene):
        n = int(math.floor(density * face.area))
        chunks.append(_sample_face(face, n, rng))
    if not chunks:
        return PointCloud.empty()
    return PointCloud(np.concatenate(chunks, axis=0))


def synthesize_grid(scene: SceneDescription, resolution: float = DEFAULT_RESOLUTION,
                    margin: float = DEFAULT_MARGIN) -> OccupancyGrid:
    """Rasterize the scene into an axis-aligned occupancy grid.

    The grid covers the scene bounding box plus `margin` on every side,
    with the origin snapped to the resolution lattice so that lattice-
    aligned scenes rasterize without half-cell offsets.  A cell is
    OCCUPIED iff its center lies in the table footprint or any obstacle
    footprint; everything else is FREE.
    """
    if resolution <= 0:
        raise GeometryError(f"resolution must be positive, got {resolution}")

    has_table = scene.table.width > 0 and scene.table.length > 0
    xs: list[float] = []
    ys: list[float] = []
    if has_table:
        for px, py in scene.table_box().footprint_corners():
            xs.append(px)
            ys.append(py)
    for obs in scene.obstacles:
        for px, py in obs.footprint_corners():
            xs.append(px)
            ys.append(py)
    T = scene.table_to_map()
    for obj in scene.objects:
        px, py = T.apply(obj.position[0], obj.position[1])
        xs.append(px)
        ys.append(py)
    xs.append(scene.robot_start.x)
    ys.append(scene.robot_start.y)

    x0 = math.floor((min(xs) - margin) / resolution) * resolution
    y0 = math.floor((min(ys) - margin) / resolution) * resolution
    width = max(1, int(math.ceil((max(xs) + margin - x0) / resolution)))
    height = max(1, int(math.ceil((max(ys) + margin - y0) / resolution)))

    ix = np.arange(width)
    iy = np.arange(height)
    cx = x0 + (ix + 0.5) * resolution
    cy = y0 + (iy + 0.5) * resolution
    gx, gy = np.meshgrid(cx, cy)        # shape (height, width)

    occupied = np.zeros((height, width), dtype=bool)
    if has_table:
        occupied |= _footprint_mask(scene.table_box(), gx, gy)
    for obs in scene.obstacles:
        occupied |= _footprint_mask(obs, gx, gy)

    cells = np.where(occupied, np.int8(CellState.OCCUPIED), np.int8(CellState.FREE))
    return OccupancyGrid(resolution=resolution, origin=Pose2D(x0, y0, 0.0),
                         width=width, height=height, cells=cells)


def _footprint_mask(box: OrientedBox, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Closed containment of grid-center coordinates in a box footprint."""
    c = math.cos(box.yaw)
    s = math.sin(box.yaw)
    dx = gx - box.center.x
    dy = gy - box.center.y
    u = c * dx + s * dy
    v = -s * dx + c * dy
    hx, hy, _ = box.half_extents
    return (np.abs(u) <= hx) & (np.abs(v) <= hy)


def snapshot_scene(scene: SceneDescription, density: float = DEFAULT_DENSITY,
                   resolution: float = DEFAULT_RESOLUTION, margin: float = DEFAULT_MARGIN,
                   seed: int = 0) -> SceneSnapshot:
    """Synthesize all three planner inputs from one scene description."""
    return SceneSnapshot(cloud=synthesize_cloud(scene, density, seed),
                         grid=synthesize_grid(scene, resolution, margin),
                         object=observe_object(scene))
