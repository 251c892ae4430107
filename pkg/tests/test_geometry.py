"""Geometry primitives: angle wrapping, transforms, box containment."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from placeplan.errors import GeometryError
from placeplan.geometry import (
    Frame,
    OrientedBox,
    Point3,
    Pose2D,
    RigidTransform2D,
    box_contains,
    normalize_angle,
    transform_pose,
)

from helpers import oracle_box_contains, random_box

finite_angle = st.floats(min_value=-50.0, max_value=50.0,
                         allow_nan=False, allow_infinity=False)
coord = st.floats(min_value=-100.0, max_value=100.0,
                  allow_nan=False, allow_infinity=False)


class TestNormalizeAngle:
    def test_zero(self):
        assert normalize_angle(0.0) == 0.0

    def test_odd_multiple_of_pi_maps_to_positive_pi(self):
        assert normalize_angle(3 * math.pi) == pytest.approx(math.pi)
        assert normalize_angle(3 * math.pi) > 0
        assert normalize_angle(-math.pi) == pytest.approx(math.pi)

    def test_adds_two_pi(self):
        assert normalize_angle(-3 * math.pi / 2) == pytest.approx(math.pi / 2)

    @given(finite_angle)
    def test_range_and_equivalence(self, a):
        r = normalize_angle(a)
        assert -math.pi < r <= math.pi
        # same direction on the unit circle
        assert math.cos(r) == pytest.approx(math.cos(a), abs=1e-9)
        assert math.sin(r) == pytest.approx(math.sin(a), abs=1e-9)


class TestTransformPose:
    def test_identity(self):
        p = transform_pose(Pose2D(1.0, 2.0, 0.5), RigidTransform2D.identity())
        assert (p.x, p.y, p.heading) == (1.0, 2.0, 0.5)

    def test_pure_translation(self):
        p = transform_pose(Pose2D(1.0, 2.0, 0.0), RigidTransform2D.translation(3.0, 0.0))
        assert (p.x, p.y, p.heading) == (4.0, 2.0, 0.0)

    def test_quarter_turn(self):
        # rotating (1, 0) by pi/2 lands on (0, 1) with heading pi/2
        p = transform_pose(Pose2D(1.0, 0.0, 0.0), RigidTransform2D(0.0, 0.0, math.pi / 2))
        assert p.x == pytest.approx(0.0, abs=1e-12)
        assert p.y == pytest.approx(1.0, abs=1e-12)
        assert p.heading == pytest.approx(math.pi / 2)

    def test_frame_retag(self):
        p = transform_pose(Pose2D(0.0, 0.0, 0.0, frame=Frame.TABLE),
                           RigidTransform2D.translation(1.0, 1.0), frame=Frame.MAP)
        assert p.frame is Frame.MAP

    @given(coord, coord, finite_angle, coord, coord, finite_angle)
    @settings(max_examples=200)
    def test_round_trip_through_inverse(self, x, y, h, tx, ty, rot):
        pose = Pose2D(x, y, h)
        T = RigidTransform2D(tx, ty, rot)
        back = transform_pose(transform_pose(pose, T), T.inverse())
        assert back.x == pytest.approx(pose.x, abs=1e-9)
        assert back.y == pytest.approx(pose.y, abs=1e-9)
        assert normalize_angle(back.heading - pose.heading) == pytest.approx(0.0, abs=1e-9)

    @given(coord, coord, finite_angle)
    def test_compose_with_inverse_is_identity(self, tx, ty, rot):
        T = RigidTransform2D(tx, ty, rot)
        I = T.compose(T.inverse())
        assert I.tx == pytest.approx(0.0, abs=1e-9)
        assert I.ty == pytest.approx(0.0, abs=1e-9)
        assert normalize_angle(I.rotation) == pytest.approx(0.0, abs=1e-9)


class TestPose2D:
    def test_heading_normalized_on_construction(self):
        assert Pose2D(0, 0, 3 * math.pi).heading == pytest.approx(math.pi)

    def test_non_finite_rejected(self):
        with pytest.raises(GeometryError):
            Pose2D(float("nan"), 0.0, 0.0)
        with pytest.raises(GeometryError):
            Point3(0.0, float("inf"), 0.0)


class TestBoxContains:
    def test_center(self):
        box = OrientedBox(Point3(0, 0, 0), (0.5, 0.5, 0.5), 0.0)
        assert box_contains(box, Point3(0, 0, 0))

    def test_boundary_is_closed(self):
        box = OrientedBox(Point3(0, 0, 0), (0.5, 0.5, 0.5), 0.0)
        assert box_contains(box, Point3(0.5, 0.0, 0.0))
        assert box_contains(box, Point3(0.5, 0.5, 0.5))
        assert not box_contains(box, Point3(0.5000001, 0.0, 0.0))

    def test_yawed_thin_box(self):
        # diagonal box: (0.6, 0.6) sits on its long axis
        box = OrientedBox(Point3(0, 0, 0), (1.0, 0.1, 1.0), math.pi / 4)
        assert oracle_box_contains(box, 0.6, 0.6, 0.0)
        assert box_contains(box, Point3(0.6, 0.6, 0.0))
        # perpendicular offset exceeds the 0.1 half width
        assert not box_contains(box, Point3(0.6, -0.6, 0.0))

    def test_invalid_half_extents(self):
        with pytest.raises(GeometryError):
            OrientedBox(Point3(0, 0, 0), (0.0, 0.5, 0.5), 0.0)

    def test_agrees_with_oracle_on_random_pairs(self):
        rng = np.random.default_rng(7)
        mismatches = 0
        for _ in range(200):
            box = random_box(rng)
            pts = rng.uniform(-3, 3, size=(50, 3))
            mask = box.contains_points(pts)
            for p, got in zip(pts, mask):
                want = oracle_box_contains(box, p[0], p[1], p[2])
                mismatches += want != bool(got)
        assert mismatches == 0

    @given(coord, coord, finite_angle)
    @settings(max_examples=100)
    def test_invariant_under_joint_rigid_motion(self, tx, ty, rot):
        rng = np.random.default_rng(42)
        box = random_box(rng)
        p = Point3(float(rng.uniform(-2, 2)), float(rng.uniform(-2, 2)),
                   float(rng.uniform(0, 2)))
        before = box_contains(box, p)

        T = RigidTransform2D(tx, ty, rot)
        bx, by = T.apply(box.center.x, box.center.y)
        moved_box = OrientedBox(Point3(bx, by, box.center.z), box.half_extents,
                                box.yaw + rot)
        px, py = T.apply(p.x, p.y)
        moved_p = Point3(px, py, p.z)
        # strict boundary points may flip under rounding; only interior
        # and clear-exterior points are stable under arbitrary motion
        u = _margin(box, p)
        if abs(u) > 1e-7:
            assert box_contains(moved_box, moved_p) == before


def _margin(box: OrientedBox, p: Point3) -> float:
    """Signed distance-like margin to the box boundary (negative inside)."""
    c = math.cos(box.yaw)
    s = math.sin(box.yaw)
    dx, dy, dz = p.x - box.center.x, p.y - box.center.y, p.z - box.center.z
    u = c * dx + s * dy
    v = -s * dx + c * dy
    hx, hy, hz = box.half_extents
    return max(abs(u) - hx, abs(v) - hy, abs(dz) - hz)
