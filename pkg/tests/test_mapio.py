"""File format round trips: PGM+YAML grids, XYZ clouds, scene JSON."""

import math

import numpy as np
import pytest

from placeplan.errors import ConfigError, ParseError
from placeplan.geometry import OrientedBox, Point3, Pose2D
from placeplan.mapio import (
    load_cloud,
    load_grid,
    load_scene,
    observation_from_dict,
    save_cloud,
    scene_to_dict,
)
from placeplan.scene import CellState, ObjectSpec, PointCloud, SceneDescription, TableSpec

META = {"image": "map.pgm", "resolution": 0.05, "origin": [-1.0, -2.0, 0.0],
        "negate": 0, "occupied_thresh": 0.65, "free_thresh": 0.196}


def pgm_p5(width: int, height: int, pixels: bytes, maxval: int = 255) -> bytes:
    return f"P5\n{width} {height}\n{maxval}\n".encode() + pixels


class TestLoadGrid:
    def test_all_white_is_free(self):
        grid = load_grid(pgm_p5(4, 3, bytes([255] * 12)), META)
        assert np.all(grid.cells == np.int8(CellState.FREE))
        assert (grid.width, grid.height) == (4, 3)
        assert grid.origin == Pose2D(-1.0, -2.0, 0.0)

    def test_all_black_is_occupied(self):
        grid = load_grid(pgm_p5(4, 3, bytes([0] * 12)), META)
        assert np.all(grid.cells == np.int8(CellState.OCCUPIED))

    def test_midgray_is_unknown(self):
        # p = (255 - 128) / 255 = 127/255, between the thresholds
        grid = load_grid(pgm_p5(1, 1, bytes([128])), META)
        assert grid.state_at(0, 0) is CellState.UNKNOWN

    def test_threshold_is_strict(self):
        # p exactly equal to occupied_thresh must stay Unknown
        meta = dict(META, occupied_thresh=(255 - 89) / 255, free_thresh=0.0)
        grid = load_grid(pgm_p5(1, 1, bytes([89])), meta)
        assert grid.state_at(0, 0) is CellState.UNKNOWN

    def test_negate_flips_probability(self):
        meta = dict(META, negate=1)
        grid = load_grid(pgm_p5(1, 1, bytes([255])), meta)
        assert grid.state_at(0, 0) is CellState.OCCUPIED

    def test_image_row_zero_is_top_of_map(self):
        # 1 wide, 2 tall: top pixel black, bottom pixel white
        grid = load_grid(pgm_p5(1, 2, bytes([0, 255])), META)
        assert grid.state_at(0, 0) is CellState.FREE       # low-y row
        assert grid.state_at(0, 1) is CellState.OCCUPIED   # high-y row

    def test_ascii_p2(self):
        data = b"P2\n# comment\n2 2\n255\n0 255\n128 0\n"
        grid = load_grid(data, META)
        assert grid.state_at(0, 1) is CellState.OCCUPIED
        assert grid.state_at(1, 1) is CellState.FREE
        assert grid.state_at(0, 0) is CellState.UNKNOWN

    def test_yaml_text_metadata(self):
        yaml_text = ("image: map.pgm\nresolution: 0.05\norigin: [0.0, 0.0, 0.0]\n"
                     "negate: 0\noccupied_thresh: 0.65\nfree_thresh: 0.196\n")
        grid = load_grid(pgm_p5(1, 1, bytes([255])), yaml_text)
        assert grid.state_at(0, 0) is CellState.FREE

    def test_bad_magic(self):
        with pytest.raises(ParseError):
            load_grid(b"P7\n1 1\n255\n\x00", META)

    def test_truncated_raster(self):
        with pytest.raises(ParseError):
            load_grid(f"P5\n4 4\n255\n".encode() + bytes(3), META)

    def test_oversized_maxval(self):
        with pytest.raises(ParseError):
            load_grid(b"P5\n1 1\n65535\n\x00\x00", META)

    def test_missing_metadata_key(self):
        meta = {k: v for k, v in META.items() if k != "occupied_thresh"}
        with pytest.raises(ConfigError):
            load_grid(pgm_p5(1, 1, bytes([0])), meta)


class TestCloudIO:
    def test_empty(self):
        assert len(load_cloud("")) == 0

    def test_comment_and_one_point(self):
        cloud = load_cloud("# hdr\n1,2,3\n")
        assert len(cloud) == 1
        assert cloud.point(0) == Point3(1.0, 2.0, 3.0)

    def test_non_numeric_reports_line(self):
        with pytest.raises(ParseError, match="line 3"):
            load_cloud("1,2,3\n\n4,x,6\n")

    def test_wrong_arity(self):
        with pytest.raises(ParseError, match="line 1"):
            load_cloud("1,2\n")

    def test_round_trip_bitwise_at_9_significant_digits(self):
        rng = np.random.default_rng(0)
        vals = rng.uniform(-50, 50, size=(100, 3))
        text = "".join("%.9g,%.9g,%.9g\n" % tuple(row) for row in vals)
        cloud = load_cloud(text)
        assert len(cloud) == 100
        assert save_cloud(cloud) == text

    def test_save_empty(self):
        assert save_cloud(PointCloud.empty()) == ""


class TestSceneJSON:
    def test_round_trip(self):
        scene = SceneDescription(
            table=TableSpec(center=Pose2D(0.4, 0.9, 0.1), length=1.8, width=0.8,
                            height=0.74),
            objects=(ObjectSpec("cup", (0.2, 0.3), 0.06, 0.2, 0.06),),
            obstacles=(OrientedBox(Point3(0.4, 0.9, 0.84), (0.1, 0.1, 0.1), 0.2),),
            robot_start=Pose2D(0.0, -1.0, math.pi / 2),
            target_id="cup")
        import json
        text = json.dumps(scene_to_dict(scene))
        back = load_scene(text)
        assert back == scene

    def test_bad_json(self):
        with pytest.raises(ParseError):
            load_scene("{not json")

    def test_missing_table(self):
        with pytest.raises(ConfigError):
            load_scene('{"objects": []}')

    def test_observation_parsing(self):
        obs = observation_from_dict({"position": [1.0, 2.0, 0.8], "width": 0.06,
                                     "height": 0.2})
        assert obs.position == Point3(1.0, 2.0, 0.8)
        with pytest.raises(ConfigError):
            observation_from_dict({"position": [1.0], "width": 0.06, "height": 0.2})
