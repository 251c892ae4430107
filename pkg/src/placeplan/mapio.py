"""File formats: PGM+YAML occupancy maps, XYZ point clouds, scene JSON.

The grid loader follows the map-server convention: the YAML metadata
names the image and thresholds, pixel row 0 is the top of the map, and
occupancy probability is (maxval - v) / maxval unless `negate` flips it.
"""

from __future__ import annotations

import json
from typing import Any, Mapping

import numpy as np
import yaml

from .errors import ConfigError, ParseError
from .geometry import OrientedBox, Point3, Pose2D
from .scene import (
    CellState,
    ObjectObservation,
    ObjectSpec,
    OccupancyGrid,
    PointCloud,
    SceneDescription,
    TableSpec,
)

_REQUIRED_GRID_KEYS = ("resolution", "origin", "negate", "occupied_thresh", "free_thresh")


def _parse_pgm(data: bytes) -> tuple[int, int, int, np.ndarray]:
    """Parse binary (P5) or ASCII (P2) PGM into (width, height, maxval, pixels).

    Pixels come back as a (height, width) uint16 array in image order
    (row 0 = top).  Comments starting with '#' are allowed anywhere in
    the header.
    """
    pos = 0

    def skip_ws() -> None:
        nonlocal pos
        while pos < len(data):
            ch = data[pos:pos + 1]
            if ch == b"#":
                nl = data.find(b"\n", pos)
                pos = len(data) if nl < 0 else nl + 1
            elif ch.isspace():
                pos += 1
            else:
                return

    def next_token() -> bytes:
        nonlocal pos
        skip_ws()
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ParseError("unexpected end of PGM header")
        return data[start:pos]

    magic = next_token()
    if magic not in (b"P5", b"P2"):
        raise ParseError(f"not a PGM image (magic {magic!r})")
    try:
        width = int(next_token())
        height = int(next_token())
        maxval = int(next_token())
    except ValueError as e:
        raise ParseError(f"malformed PGM header: {e}") from None
    if width <= 0 or height <= 0:
        raise ParseError(f"bad PGM dimensions {width}x{height}")
    if not 0 < maxval < 256:
        raise ParseError(f"unsupported PGM maxval {maxval} (expected 1..255)")

    if magic == b"P5":
        pos += 1  # single whitespace byte after maxval
        raster = data[pos:pos + width * height]
        if len(raster) < width * height:
            raise ParseError(f"PGM raster truncated: {len(raster)} of {width * height} bytes")
        pixels = np.frombuffer(raster, dtype=np.uint8, count=width * height)
    else:
        tokens = data[pos:].split()
        if len(tokens) < width * height:
            raise ParseError(f"PGM raster truncated: {len(tokens)} of {width * height} values")
        try:
            pixels = np.array([int(t) for t in tokens[:width * height]], dtype=np.uint16)
        except ValueError as e:
            raise ParseError(f"non-numeric PGM sample: {e}") from None
    if pixels.max(initial=0) > maxval:
        raise ParseError("PGM sample exceeds declared maxval")
    return width, height, maxval, pixels.astype(np.uint16).reshape(height, width)


def load_grid(pgm_bytes: bytes, yaml_metadata: str | bytes | Mapping[str, Any]) -> OccupancyGrid:
    """Build an OccupancyGrid from PGM image bytes and map metadata.

    Metadata may be a YAML string or an already-parsed mapping with keys
    resolution, origin [x, y, yaw], negate, occupied_thresh, free_thresh.
    Cells are OCCUPIED when p > occupied_thresh, FREE when
    p < free_thresh, UNKNOWN otherwise, where p is the occupancy
    probability of the pixel.  Image row 0 maps to the top of the grid
    (highest y).
    """
    if isinstance(yaml_metadata, (str, bytes)):
        try:
            meta = yaml.safe_load(yaml_metadata)
        except yaml.YAMLError as e:
            raise ParseError(f"bad YAML metadata: {e}") from None
    else:
        meta = dict(yaml_metadata)
    if not isinstance(meta, Mapping):
        raise ConfigError("grid metadata must be a mapping")
    missing = [k for k in _REQUIRED_GRID_KEYS if k not in meta]
    if missing:
        raise ConfigError(f"grid metadata missing keys: {', '.join(missing)}")

    resolution = float(meta["resolution"])
    origin_raw = meta["origin"]
    if not isinstance(origin_raw, (list, tuple)) or len(origin_raw) < 2:
        raise ConfigError(f"origin must be [x, y, yaw], got {origin_raw!r}")
    yaw = float(origin_raw[2]) if len(origin_raw) > 2 else 0.0
    origin = Pose2D(float(origin_raw[0]), float(origin_raw[1]), yaw)
    negate = int(meta["negate"])
    occupied_thresh = float(meta["occupied_thresh"])
    free_thresh = float(meta["free_thresh"])

    width, height, maxval, pixels = _parse_pgm(pgm_bytes)
    v = pixels.astype(np.float64)
    p = v / maxval if negate else (maxval - v) / maxval
    cells = np.full((height, width), np.int8(CellState.UNKNOWN))
    cells[p > occupied_thresh] = np.int8(CellState.OCCUPIED)
    cells[p < free_thresh] = np.int8(CellState.FREE)
    # image row 0 is the top of the map; grid row 0 is the lowest y
    cells = np.flipud(cells).copy()
    return OccupancyGrid(resolution=resolution, origin=origin,
                         width=width, height=height, cells=cells)


def load_cloud(xyz_text: str) -> PointCloud:
    """Parse "x,y,z" lines into a cloud; '#' comments and blank lines skipped."""
    rows = []
    for lineno, line in enumerate(xyz_text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split(",")
        if len(parts) != 3:
            raise ParseError(f"line {lineno}: expected 3 comma-separated values, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise ParseError(f"line {lineno}: non-numeric token in {stripped!r}") from None
    if not rows:
        return PointCloud.empty()
    return PointCloud(np.array(rows, dtype=np.float64))


def save_cloud(cloud: PointCloud) -> str:
    """Serialize a cloud as one "x,y,z" line per point, 9 significant digits."""
    lines = ["%.9g,%.9g,%.9g" % (x, y, z) for x, y, z in cloud.points]
    return "\n".join(lines) + ("\n" if lines else "")


def _pose_from_json(obj: Any, what: str) -> Pose2D:
    if isinstance(obj, Mapping):
        return Pose2D(float(obj["x"]), float(obj["y"]), float(obj.get("heading", 0.0)))
    if isinstance(obj, (list, tuple)) and len(obj) in (2, 3):
        heading = float(obj[2]) if len(obj) == 3 else 0.0
        return Pose2D(float(obj[0]), float(obj[1]), heading)
    raise ConfigError(f"{what} must be {{x, y, heading}} or [x, y, heading], got {obj!r}")


def scene_from_dict(doc: Mapping[str, Any]) -> SceneDescription:
    """Build a SceneDescription from a parsed scene JSON document."""
    try:
        t = doc["table"]
        table = TableSpec(center=_pose_from_json(t["center"], "table.center"),
                          length=float(t["length"]), width=float(t["width"]),
                          height=float(t["height"]))
        objects = []
        for o in doc.get("objects", []):
            pos = o["position"]
            if isinstance(pos, Mapping):
                pxy = (float(pos["x"]), float(pos["y"]))
            else:
                pxy = (float(pos[0]), float(pos[1]))
            objects.append(ObjectSpec(id=str(o["id"]), position=pxy,
                                      width=float(o["width"]), height=float(o["height"]),
                                      depth=float(o["depth"])))
        obstacles = []
        for b in doc.get("obstacles", []):
            cx, cy, cz = (float(v) for v in b["center"])
            hx, hy, hz = (float(v) for v in b["half_extents"])
            obstacles.append(OrientedBox(center=Point3(cx, cy, cz),
                                         half_extents=(hx, hy, hz),
                                         yaw=float(b.get("yaw", 0.0))))
        robot_start = _pose_from_json(doc.get("robot_start", [0.0, 0.0, 0.0]), "robot_start")
        return SceneDescription(table=table, objects=tuple(objects),
                                obstacles=tuple(obstacles), robot_start=robot_start,
                                target_id=str(doc.get("target_id", "")))
    except (KeyError, IndexError, TypeError, ValueError) as e:
        raise ConfigError(f"bad scene document: {e!r}") from None


def load_scene(text: str) -> SceneDescription:
    """Parse a scene JSON document (meters and radians throughout)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"scene file is not valid JSON: {e}") from None
    if not isinstance(doc, Mapping):
        raise ConfigError("scene document must be a JSON object")
    return scene_from_dict(doc)


def scene_to_dict(scene: SceneDescription) -> dict[str, Any]:
    return {
        "table": {
            "center": {"x": scene.table.center.x, "y": scene.table.center.y,
                       "heading": scene.table.center.heading},
            "length": scene.table.length,
            "width": scene.table.width,
            "height": scene.table.height,
        },
        "objects": [
            {"id": o.id, "position": [o.position[0], o.position[1]],
             "width": o.width, "height": o.height, "depth": o.depth}
            for o in scene.objects
        ],
        "obstacles": [
            {"center": [b.center.x, b.center.y, b.center.z],
             "half_extents": list(b.half_extents), "yaw": b.yaw}
            for b in scene.obstacles
        ],
        "robot_start": {"x": scene.robot_start.x, "y": scene.robot_start.y,
                        "heading": scene.robot_start.heading},
        "target_id": scene.target_id,
    }


def observation_from_dict(doc: Mapping[str, Any]) -> ObjectObservation:
    """Parse an object observation JSON: map-frame position plus extents."""
    try:
        pos = doc["position"]
        if isinstance(pos, Mapping):
            p = Point3(float(pos["x"]), float(pos["y"]), float(pos["z"]))
        else:
            p = Point3(float(pos[0]), float(pos[1]), float(pos[2]))
        return ObjectObservation(position=p, width=float(doc["width"]),
                                 height=float(doc["height"]))
    except (KeyError, IndexError, TypeError, ValueError) as e:
        raise ConfigError(f"bad object observation: {e!r}") from None

