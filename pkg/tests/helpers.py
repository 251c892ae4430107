"""Independent oracles and scene generators shared by the test modules.

The oracles deliberately avoid the library's vectorized code paths:
containment is re-derived per point with scalar math, and the footprint
check rasterizes the whole grid cell by cell.
"""

from __future__ import annotations

import math

import numpy as np

from placeplan.geometry import OrientedBox, Point3, Pose2D
from placeplan.scene import (
    CellState,
    ObjectSpec,
    OccupancyGrid,
    SceneDescription,
    TableSpec,
)


def oracle_box_contains(box: OrientedBox, x: float, y: float, z: float) -> bool:
    """Transform the point into the box frame, then compare axis by axis."""
    c = math.cos(box.yaw)
    s = math.sin(box.yaw)
    dx = x - box.center.x
    dy = y - box.center.y
    dz = z - box.center.z
    u = c * dx + s * dy
    v = -s * dx + c * dy
    hx, hy, hz = box.half_extents
    return abs(u) <= hx and abs(v) <= hy and abs(dz) <= hz


def oracle_count_points(points: np.ndarray, box: OrientedBox,
                        exclusion: OrientedBox | None = None) -> int:
    """Per-point loop version of the crop-box count."""
    n = 0
    for x, y, z in points:
        if not oracle_box_contains(box, x, y, z):
            continue
        if exclusion is not None and oracle_box_contains(exclusion, x, y, z):
            continue
        n += 1
    return n


def oracle_footprint_occupied(grid: OccupancyGrid, center: tuple[float, float],
                              r: float, treat_unknown_as_occupied: bool = True) -> bool:
    """Rasterize the circle over the full index window, cell by cell.

    Any covered cell outside the grid counts as occupied, matching the
    conservative semantics of the implementation under test.
    """
    c = math.cos(-grid.origin.heading)
    s = math.sin(-grid.origin.heading)
    dx = center[0] - grid.origin.x
    dy = center[1] - grid.origin.y
    gx = c * dx - s * dy
    gy = s * dx + c * dy
    res = grid.resolution
    ix_lo = int(math.floor((gx - r) / res)) - 1
    ix_hi = int(math.floor((gx + r) / res)) + 1
    iy_lo = int(math.floor((gy - r) / res)) - 1
    iy_hi = int(math.floor((gy + r) / res)) + 1
    bad_states = {int(CellState.OCCUPIED)}
    if treat_unknown_as_occupied:
        bad_states.add(int(CellState.UNKNOWN))
    for iy in range(iy_lo, iy_hi + 1):
        for ix in range(ix_lo, ix_hi + 1):
            cx = (ix + 0.5) * res
            cy = (iy + 0.5) * res
            if (cx - gx) ** 2 + (cy - gy) ** 2 > r * r:
                continue
            if not (0 <= ix < grid.width and 0 <= iy < grid.height):
                return True
            if int(grid.cells[iy, ix]) in bad_states:
                return True
    return False


def random_box(rng: np.random.Generator, span: float = 2.0) -> OrientedBox:
    center = Point3(float(rng.uniform(-span, span)), float(rng.uniform(-span, span)),
                    float(rng.uniform(0.0, span)))
    half = (float(rng.uniform(0.05, 1.0)), float(rng.uniform(0.05, 1.0)),
            float(rng.uniform(0.05, 1.0)))
    return OrientedBox(center=center, half_extents=half,
                       yaw=float(rng.uniform(-math.pi, math.pi)))


def random_grid(rng: np.random.Generator, max_side: int = 24,
                p_occupied: float = 0.2, p_unknown: float = 0.1) -> OccupancyGrid:
    width = int(rng.integers(4, max_side))
    height = int(rng.integers(4, max_side))
    draw = rng.random((height, width))
    cells = np.full((height, width), np.int8(CellState.FREE))
    cells[draw < p_occupied] = np.int8(CellState.OCCUPIED)
    cells[draw > 1.0 - p_unknown] = np.int8(CellState.UNKNOWN)
    origin = Pose2D(float(rng.uniform(-2, 2)), float(rng.uniform(-2, 2)),
                    float(rng.uniform(-math.pi, math.pi)))
    return OccupancyGrid(resolution=float(rng.uniform(0.03, 0.12)), origin=origin,
                         width=width, height=height, cells=cells)


def random_scene(rng: np.random.Generator, n_obstacles: int | None = None) -> SceneDescription:
    """A randomized tabletop scene with one target and on-table obstacles.

    Obstacles stay inside the table footprint so that adding more never
    grows the scene bounding box (which keeps synthesized grid extents
    comparable across variants of the same scene).
    """
    width = float(rng.uniform(0.6, 1.2))
    length = float(rng.uniform(1.0, 2.0))
    height = float(rng.uniform(0.5, 0.9))
    center = Pose2D(float(rng.uniform(-0.5, 0.5)), float(rng.uniform(-0.5, 0.5)),
                    float(rng.uniform(-math.pi, math.pi)))
    table = TableSpec(center=center, length=length, width=width, height=height)

    target = ObjectSpec(
        id="target",
        position=(float(rng.uniform(0.10, width - 0.10)),
                  float(rng.uniform(0.10, length - 0.10))),
        width=float(rng.uniform(0.04, 0.10)),
        height=float(rng.uniform(0.10, 0.30)),
        depth=float(rng.uniform(0.04, 0.10)),
    )

    scene = SceneDescription(table=table, objects=(target,), obstacles=(),
                             robot_start=Pose2D(center.x - 2.0, center.y - 2.0, 0.0),
                             target_id="target")
    if n_obstacles is None:
        n_obstacles = int(rng.integers(0, 3))
    obstacles = tuple(random_on_table_obstacle(rng, scene) for _ in range(n_obstacles))
    return SceneDescription(table=table, objects=(target,), obstacles=obstacles,
                            robot_start=scene.robot_start, target_id="target")


def random_on_table_obstacle(rng: np.random.Generator,
                             scene: SceneDescription) -> OrientedBox:
    """A box sitting on the table top, fully inside the footprint."""
    hx = float(rng.uniform(0.03, 0.10))
    hy = float(rng.uniform(0.03, 0.10))
    hz = float(rng.uniform(0.05, 0.20))
    reach = math.hypot(hx, hy)
    t = scene.table
    px = float(rng.uniform(reach, t.width - reach))
    py = float(rng.uniform(reach, t.length - reach))
    mx, my = scene.table_to_map().apply(px, py)
    return OrientedBox(center=Point3(mx, my, t.height + hz),
                       half_extents=(hx, hy, hz),
                       yaw=float(rng.uniform(-math.pi, math.pi)))


def surface_distance(scene: SceneDescription, x: float, y: float, z: float) -> float:
    """Distance from a point to the nearest declared scene surface.

    Used to verify that synthesized cloud points lie on a face.  The
    check is shell distance: inside-the-box points report how far they
    are from the nearest face plane.
    """
    best = math.inf
    boxes = []
    if scene.table.width > 0 and scene.table.length > 0:
        boxes.append(scene.table_box())
    boxes.extend(scene.object_box(o) for o in scene.objects)
    boxes.extend(scene.obstacles)
    for box in boxes:
        c = math.cos(box.yaw)
        s = math.sin(box.yaw)
        dx = x - box.center.x
        dy = y - box.center.y
        dz = z - box.center.z
        u = c * dx + s * dy
        v = -s * dx + c * dy
        hx, hy, hz = box.half_extents
        du, dv, dw = abs(u) - hx, abs(v) - hy, abs(dz) - hz
        if du <= 0 and dv <= 0 and dw <= 0:
            dist = min(-du, -dv, -dw)     # inside: distance to nearest face
        else:
            dist = math.hypot(max(du, 0.0), math.hypot(max(dv, 0.0), max(dw, 0.0)))
        best = min(best, dist)
    return best
