"""Candidate ranking and pickup execution against a motion backend.

The execution loop keeps selecting the cheapest remaining candidate,
navigates to it, and re-ranks the rest from wherever the robot actually
ended up whenever navigation fails.  Once a navigation succeeds the
pickup runs exactly once and its result is final.

Real navigation and manipulation stacks live behind the MotionBackend
protocol; SimulatedBackend provides the deterministic tabletop stand-in
used by the experiment harness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Protocol

import numpy as np

from .errors import EmptySetError, ParamError
from .geometry import Point3, Pose2D, heading_between, planar_distance
from .planner import (
    CandidateSet,
    PlacementCandidate,
    RobotParams,
    count_points_in_box,
    footprint_occupied,
    object_exclusion_box,
    reach_box,
)
from .scene import ObjectObservation, SceneSnapshot


@dataclass(frozen=True)
class MotionCostWeights:
    """Weights of the navigation and manipulation legs of the cost."""

    nav_weight: float = 1.0
    manip_weight: float = 1.0

    def __post_init__(self) -> None:
        if self.nav_weight < 0 or self.manip_weight < 0:
            raise ParamError("weights must be non-negative")
        if self.nav_weight == 0 and self.manip_weight == 0:
            raise ParamError("at least one weight must be positive")


def motion_cost(candidate: Pose2D, object_position: Point3, current_pose: Pose2D,
                weights: MotionCostWeights = MotionCostWeights()) -> float:
    """Weighted sum of drive distance to the candidate and reach distance from it."""
    nav = planar_distance(current_pose.xy, candidate.xy)
    manip = planar_distance(candidate.xy, (object_position.x, object_position.y))
    return weights.nav_weight * nav + weights.manip_weight * manip


def select_best(candidates: list[PlacementCandidate] | CandidateSet,
                object_position: Point3, current_pose: Pose2D,
                weights: MotionCostWeights = MotionCostWeights()) -> PlacementCandidate:
    """Candidate with minimal motion cost; ties go to the lowest radial
    index, then the shortest standoff."""
    pool = list(candidates)
    if not pool:
        raise EmptySetError("cannot select from an empty candidate set")
    return min(pool, key=lambda c: (motion_cost(c.pose, object_position, current_pose, weights),
                                    c.radial_index, c.standoff))


@dataclass(frozen=True)
class NavResult:
    """Outcome of one navigation request."""

    success: bool
    resulting_pose: Pose2D


@dataclass(frozen=True)
class Attempt:
    """One loop iteration: where we tried to go and what happened."""

    goal: Pose2D
    nav: NavResult
    pickup: bool | None = None
    candidate: PlacementCandidate | None = None
    cost: float | None = None

    def to_dict(self) -> dict:
        return {
            "goal": {"x": self.goal.x, "y": self.goal.y, "heading": self.goal.heading},
            "nav_success": self.nav.success,
            "resulting_pose": {"x": self.nav.resulting_pose.x, "y": self.nav.resulting_pose.y,
                               "heading": self.nav.resulting_pose.heading},
            "pickup": self.pickup,
            "radial_index": self.candidate.radial_index if self.candidate else None,
            "standoff": self.candidate.standoff if self.candidate else None,
            "cost": self.cost,
        }


class ExecutionStatus(Enum):
    PICKUP_SUCCEEDED = "pickup_succeeded"
    PICKUP_FAILED = "pickup_failed"
    NO_CANDIDATES = "no_candidates"
    ALL_NAVIGATION_FAILED = "all_navigation_failed"


@dataclass(frozen=True)
class ExecutionOutcome:
    status: ExecutionStatus
    attempts: tuple[Attempt, ...]
    final_pose: Pose2D

    @property
    def succeeded(self) -> bool:
        return self.status is ExecutionStatus.PICKUP_SUCCEEDED

    def to_dict(self) -> dict:
        return {"status": self.status.value,
                "attempts": [a.to_dict() for a in self.attempts],
                "final_pose": {"x": self.final_pose.x, "y": self.final_pose.y,
                               "heading": self.final_pose.heading}}


class MotionBackend(Protocol):
    """Seam to the robot's navigation and manipulation stacks."""

    def current_pose(self) -> Pose2D:
        ...

    def navigate(self, goal: Pose2D) -> NavResult:
        ...

    def pickup(self, object_position: Point3, from_pose: Pose2D) -> bool:
        ...


def execute_pickup(object_position: Point3, candidates: CandidateSet,
                   backend: MotionBackend,
                   weights: MotionCostWeights = MotionCostWeights()) -> ExecutionOutcome:
    """Drive the rank / navigate / retry loop until a pickup runs or
    the candidates run out.

    Each candidate is attempted at most once.  After a failed
    navigation the remaining candidates are re-ranked from the pose the
    backend reports, not from where the robot started.
    """
    remaining = list(candidates)
    current = backend.current_pose()
    attempts: list[Attempt] = []
    if not remaining:
        return ExecutionOutcome(status=ExecutionStatus.NO_CANDIDATES, attempts=(),
                                final_pose=current)
    while remaining:
        best = select_best(remaining, object_position, current, weights)
        remaining.remove(best)
        cost = motion_cost(best.pose, object_position, current, weights)
        nav = backend.navigate(best.pose)
        current = nav.resulting_pose
        if not nav.success:
            attempts.append(Attempt(goal=best.pose, nav=nav, candidate=best, cost=cost))
            continue
        picked = backend.pickup(object_position, current)
        attempts.append(Attempt(goal=best.pose, nav=nav, pickup=picked,
                                candidate=best, cost=cost))
        status = (ExecutionStatus.PICKUP_SUCCEEDED if picked
                  else ExecutionStatus.PICKUP_FAILED)
        return ExecutionOutcome(status=status, attempts=tuple(attempts), final_pose=current)
    return ExecutionOutcome(status=ExecutionStatus.ALL_NAVIGATION_FAILED,
                            attempts=tuple(attempts), final_pose=current)


@dataclass(frozen=True)
class NavModel:
    """Failure model of the simulated navigation stack.

    With always_succeeds (the benchmark default) the straight-line
    feasibility check is skipped; failure_prob adds seeded random
    aborts on top of whichever geometric behavior is active.
    """

    always_succeeds: bool = True
    failure_prob: float = 0.0


@dataclass(frozen=True)
class PickupModel:
    """Failure model of the simulated pickup behavior."""

    failure_prob: float = 0.0


class SimulatedBackend:
    """Deterministic tabletop stand-in for the robot's motion stacks.

    Navigation (when not forced to succeed) walks the straight segment
    to the goal and fails at the first sample whose inflated footprint
    covers an occupied cell.  Pickup succeeds when the object sits
    inside the reach band and the reach corridor from the final pose is
    clear of obstacle points.
    """

    def __init__(self, snapshot: SceneSnapshot, params: RobotParams, start_pose: Pose2D,
                 nav_model: NavModel = NavModel(), pickup_model: PickupModel = PickupModel(),
                 seed: int = 0, treat_unknown_as_occupied: bool = True):
        self.snapshot = snapshot
        self.params = params
        self.nav_model = nav_model
        self.pickup_model = pickup_model
        self.treat_unknown_as_occupied = treat_unknown_as_occupied
        self._pose = start_pose
        self._rng = np.random.default_rng(seed)

    def current_pose(self) -> Pose2D:
        return self._pose

    def navigate(self, goal: Pose2D) -> NavResult:
        if self.nav_model.failure_prob > 0 and self._rng.random() < self.nav_model.failure_prob:
            # random abort partway along the segment
            mid = Pose2D((self._pose.x + goal.x) / 2.0, (self._pose.y + goal.y) / 2.0,
                         heading_between(self._pose.xy, goal.xy)
                         if self._pose.xy != goal.xy else goal.heading)
            self._pose = mid
            return NavResult(success=False, resulting_pose=mid)
        if not self.nav_model.always_succeeds:
            blocked_at = self._first_blocked_pose(goal)
            if blocked_at is not None:
                self._pose = blocked_at
                return NavResult(success=False, resulting_pose=blocked_at)
        self._pose = goal
        return NavResult(success=True, resulting_pose=goal)

    def _first_blocked_pose(self, goal: Pose2D) -> Pose2D | None:
        """Last free pose before the straight path hits an occupied footprint,
        or None when the whole segment is clear."""
        grid = self.snapshot.grid
        r = self.params.footprint_radius
        length = planar_distance(self._pose.xy, goal.xy)
        steps = max(1, int(math.ceil(length / (grid.resolution / 2.0))))
        heading = (heading_between(self._pose.xy, goal.xy) if length > 0 else goal.heading)
        prev = self._pose
        for k in range(steps + 1):
            t = k / steps
            x = self._pose.x + t * (goal.x - self._pose.x)
            y = self._pose.y + t * (goal.y - self._pose.y)
            if footprint_occupied(grid, (x, y), r, self.treat_unknown_as_occupied):
                return prev
            prev = Pose2D(x, y, heading)
        return None

    def pickup(self, object_position: Point3, from_pose: Pose2D) -> bool:
        d = planar_distance(from_pose.xy, (object_position.x, object_position.y))
        # tolerance: a pose placed exactly at reach_min can re-measure a hair short
        ok = self.params.reach_min - 1e-9 <= d <= self.params.reach_max + 1e-9
        if ok:
            detected = self.snapshot.object
            target = ObjectObservation(position=object_position, width=detected.width,
                                       height=detected.height)
            corridor = reach_box(target, from_pose.xy)
            count = count_points_in_box(self.snapshot.cloud, corridor,
                                        object_exclusion_box(target))
            ok = count <= self.params.obstacle_point_threshold
        if ok and self.pickup_model.failure_prob > 0:
            ok = self._rng.random() >= self.pickup_model.failure_prob
        return ok
