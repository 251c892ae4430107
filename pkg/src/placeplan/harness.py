"""Tabletop grid experiment: sweep object positions, run pickup trials.

A target object is placed at each cell of a taped grid on the table and
grasped several times per cell, once with the placement planner driving
the approach pose and once against a baseline that always drives to a
fixed goal near the table's short edge.  All randomness is derived from
the experiment seed, so reports reproduce byte for byte.
"""

from __future__ import annotations

import hashlib
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any

from .errors import ConfigError, RangeError
from .executor import (
    Attempt,
    ExecutionOutcome,
    ExecutionStatus,
    MotionCostWeights,
    NavModel,
    PickupModel,
    SimulatedBackend,
    execute_pickup,
)
from .geometry import Pose2D, transform_pose
from .planner import RobotParams, plan_placements
from .scene import (
    DEFAULT_DENSITY,
    DEFAULT_MARGIN,
    DEFAULT_RESOLUTION,
    ObjectSpec,
    SceneDescription,
    SceneSnapshot,
    TableSpec,
    snapshot_scene,
    table_corner_transform,
)

TARGET_OBJECT_ID = "target"
DEFAULT_BASELINE_EDGE_OFFSET = 0.35   # robot center to table short edge, meters


class Approach(Enum):
    PROPOSED = "proposed"
    BASELINE = "baseline"


def stable_seed(*parts: Any) -> int:
    """Platform-independent 63-bit seed from the given parts."""
    text = "|".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass(frozen=True)
class GridExperimentConfig:
    """Everything needed to rerun the grid experiment.

    The table's short-edge corner sits at the map origin by default, so
    table-frame and map-frame coordinates coincide.  baseline_goal and
    robot_start are table-frame poses; baseline_goal of None means
    "centered on the aligned short edge, one offset outward, facing the
    table".
    """

    table_height: float = 0.74
    table_width: float = 0.80
    table_length: float = 1.80
    table_center: Pose2D = Pose2D(0.40, 0.90, 0.0)
    cell_size: float = 0.20
    grid_cols: int = 3
    grid_rows: int = 4
    trials_per_cell: int = 5
    approach: Approach = Approach.PROPOSED
    baseline_goal: Pose2D | None = None
    baseline_edge_offset: float = DEFAULT_BASELINE_EDGE_OFFSET
    object_width: float = 0.06
    object_height: float = 0.20
    object_depth: float = 0.06
    robot_start: Pose2D = Pose2D(0.40, -1.50, math.pi / 2)
    params: RobotParams = field(default_factory=RobotParams)
    weights: MotionCostWeights = field(default_factory=MotionCostWeights)
    nav_model: NavModel = field(default_factory=NavModel)
    pickup_model: PickupModel = field(default_factory=PickupModel)
    density: float = DEFAULT_DENSITY
    resolution: float = DEFAULT_RESOLUTION
    margin: float = DEFAULT_MARGIN
    seed: int = 0

    def __post_init__(self) -> None:
        if self.grid_cols * self.cell_size > self.table_width + 1e-9:
            raise ConfigError("grid does not fit across the table width")
        if self.grid_rows * self.cell_size > self.table_length + 1e-9:
            raise ConfigError("grid does not fit along the table length")
        if self.trials_per_cell < 1:
            raise ConfigError("trials_per_cell must be >= 1")

    def resolved_baseline_goal(self) -> Pose2D:
        """Table-frame baseline goal: centered short edge, facing the table."""
        if self.baseline_goal is not None:
            return self.baseline_goal
        return Pose2D(self.table_width / 2.0, -self.baseline_edge_offset, math.pi / 2)

    def table_spec(self) -> TableSpec:
        return TableSpec(center=self.table_center, length=self.table_length,
                         width=self.table_width, height=self.table_height)

    def robot_start_map(self) -> Pose2D:
        """Map-frame robot start (the configured pose is table-frame)."""
        return transform_pose(self.robot_start, table_corner_transform(self.table_spec()))

    def to_dict(self) -> dict[str, Any]:
        def pose(p: Pose2D) -> dict[str, float]:
            return {"x": p.x, "y": p.y, "heading": p.heading}

        return {
            "table": {"height": self.table_height, "width": self.table_width,
                      "length": self.table_length, "center": pose(self.table_center)},
            "cell_size": self.cell_size,
            "grid_shape": [self.grid_cols, self.grid_rows],
            "trials_per_cell": self.trials_per_cell,
            "baseline_goal": pose(self.resolved_baseline_goal()),
            "object": {"width": self.object_width, "height": self.object_height,
                       "depth": self.object_depth},
            "robot_start": pose(self.robot_start),
            "params": {
                "footprint_radius": self.params.footprint_radius,
                "robot_height": self.params.robot_height,
                "reach_min": self.params.reach_min,
                "reach_max": self.params.reach_max,
                "angle_increment": self.params.angle_increment,
                "obstacle_point_threshold": self.params.obstacle_point_threshold,
            },
            "weights": {"nav_weight": self.weights.nav_weight,
                        "manip_weight": self.weights.manip_weight},
            "nav_model": {"always_succeeds": self.nav_model.always_succeeds,
                          "failure_prob": self.nav_model.failure_prob},
            "pickup_model": {"failure_prob": self.pickup_model.failure_prob},
            "density": self.density,
            "resolution": self.resolution,
            "margin": self.margin,
            "seed": self.seed,
        }


def config_from_dict(doc: dict[str, Any]) -> tuple[GridExperimentConfig, list[Approach]]:
    """Parse a benchmark config document.

    Returns the base configuration plus the approaches to run (both, by
    default).  Unknown keys are rejected so typos do not silently fall
    back to defaults.
    """
    known = {"table", "cell_size", "grid_shape", "trials_per_cell", "approaches",
             "baseline_goal", "baseline_edge_offset", "object", "robot_start", "params",
             "weights", "nav_model", "pickup_model", "density", "resolution", "margin",
             "seed"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown benchmark config keys: {', '.join(sorted(unknown))}")

    def pose(d: Any, what: str) -> Pose2D:
        try:
            if isinstance(d, dict):
                return Pose2D(float(d["x"]), float(d["y"]), float(d.get("heading", 0.0)))
            return Pose2D(float(d[0]), float(d[1]), float(d[2]) if len(d) > 2 else 0.0)
        except (KeyError, IndexError, TypeError, ValueError):
            raise ConfigError(f"bad pose for {what}: {d!r}") from None

    kwargs: dict[str, Any] = {}
    try:
        if "table" in doc:
            t = doc["table"]
            for src, dst in (("height", "table_height"), ("width", "table_width"),
                             ("length", "table_length")):
                if src in t:
                    kwargs[dst] = float(t[src])
            if "center" in t:
                kwargs["table_center"] = pose(t["center"], "table.center")
        if "cell_size" in doc:
            kwargs["cell_size"] = float(doc["cell_size"])
        if "grid_shape" in doc:
            kwargs["grid_cols"] = int(doc["grid_shape"][0])
            kwargs["grid_rows"] = int(doc["grid_shape"][1])
        if "trials_per_cell" in doc:
            kwargs["trials_per_cell"] = int(doc["trials_per_cell"])
        if "baseline_goal" in doc and doc["baseline_goal"] is not None:
            kwargs["baseline_goal"] = pose(doc["baseline_goal"], "baseline_goal")
        if "baseline_edge_offset" in doc:
            kwargs["baseline_edge_offset"] = float(doc["baseline_edge_offset"])
        if "object" in doc:
            o = doc["object"]
            kwargs["object_width"] = float(o["width"])
            kwargs["object_height"] = float(o["height"])
            kwargs["object_depth"] = float(o["depth"])
        if "robot_start" in doc:
            kwargs["robot_start"] = pose(doc["robot_start"], "robot_start")
        if "params" in doc:
            kwargs["params"] = RobotParams.from_dict(doc["params"])
        if "weights" in doc:
            w = doc["weights"]
            kwargs["weights"] = MotionCostWeights(float(w.get("nav_weight", 1.0)),
                                                  float(w.get("manip_weight", 1.0)))
        if "nav_model" in doc:
            nm = doc["nav_model"]
            kwargs["nav_model"] = NavModel(bool(nm.get("always_succeeds", True)),
                                           float(nm.get("failure_prob", 0.0)))
        if "pickup_model" in doc:
            kwargs["pickup_model"] = PickupModel(float(doc["pickup_model"].get("failure_prob", 0.0)))
        for key in ("density", "resolution", "margin"):
            if key in doc:
                kwargs[key] = float(doc[key])
        if "seed" in doc:
            kwargs["seed"] = int(doc["seed"])
    except (KeyError, IndexError, TypeError, ValueError) as e:
        raise ConfigError(f"bad benchmark config: {e!r}") from None

    approaches = [Approach(a) for a in doc.get("approaches", ["proposed", "baseline"])]
    return GridExperimentConfig(**kwargs), approaches


def cell_center(cell: tuple[int, int], config: GridExperimentConfig) -> tuple[float, float]:
    """Table-frame center of a grid cell.

    Columns are centered across the table width; row 0 touches the
    short edge the grid is aligned with.
    """
    i, j = cell
    if not (0 <= i < config.grid_cols and 0 <= j < config.grid_rows):
        raise RangeError(f"cell {cell} outside {config.grid_cols}x{config.grid_rows} grid")
    margin_x = (config.table_width - config.grid_cols * config.cell_size) / 2.0
    x = margin_x + (i + 0.5) * config.cell_size
    y = (j + 0.5) * config.cell_size
    return (x, y)


def build_cell_scene(cell: tuple[int, int], config: GridExperimentConfig) -> SceneDescription:
    """Scene with the target object centered on the given grid cell."""
    target = ObjectSpec(id=TARGET_OBJECT_ID, position=cell_center(cell, config),
                        width=config.object_width, height=config.object_height,
                        depth=config.object_depth)
    return SceneDescription(table=config.table_spec(), objects=(target,),
                            robot_start=config.robot_start_map(),
                            target_id=TARGET_OBJECT_ID)


@dataclass(frozen=True)
class TrialResult:
    cell: tuple[int, int]
    approach: Approach
    trial: int
    success: bool
    outcome: ExecutionOutcome


def run_baseline(snapshot: SceneSnapshot, backend: SimulatedBackend,
                 goal: Pose2D) -> ExecutionOutcome:
    """Fixed-goal pickup: drive to the predefined pose, then grasp once."""
    nav = backend.navigate(goal)
    if not nav.success:
        attempt = Attempt(goal=goal, nav=nav)
        return ExecutionOutcome(status=ExecutionStatus.ALL_NAVIGATION_FAILED,
                                attempts=(attempt,), final_pose=nav.resulting_pose)
    picked = backend.pickup(snapshot.object.position, nav.resulting_pose)
    attempt = Attempt(goal=goal, nav=nav, pickup=picked)
    status = ExecutionStatus.PICKUP_SUCCEEDED if picked else ExecutionStatus.PICKUP_FAILED
    return ExecutionOutcome(status=status, attempts=(attempt,),
                            final_pose=nav.resulting_pose)


def run_trial(cell: tuple[int, int], approach: Approach, config: GridExperimentConfig,
              seed: int) -> TrialResult:
    """One grasp attempt; fully determined by (cell, approach, config, seed)."""
    scene = build_cell_scene(cell, config)
    snapshot = snapshot_scene(scene, density=config.density, resolution=config.resolution,
                              margin=config.margin, seed=stable_seed(seed, "scene"))
    backend = SimulatedBackend(snapshot, config.params, start_pose=scene.robot_start,
                               nav_model=config.nav_model, pickup_model=config.pickup_model,
                               seed=stable_seed(seed, "backend"))
    if approach is Approach.PROPOSED:
        candidates = plan_placements(snapshot, config.params)
        outcome = execute_pickup(snapshot.object.position, candidates, backend, config.weights)
    else:
        goal = transform_pose(config.resolved_baseline_goal(), scene.table_to_map())
        outcome = run_baseline(snapshot, backend, goal)
    return TrialResult(cell=cell, approach=approach, trial=-1, success=outcome.succeeded,
                       outcome=outcome)


@dataclass(frozen=True)
class CellResult:
    """Aggregated trials for one grid cell."""

    cell: tuple[int, int]
    successes: int
    failures: int
    trials: tuple[TrialResult, ...]

    def __post_init__(self) -> None:
        if self.successes + self.failures != len(self.trials):
            raise ConfigError("cell totals do not match trial count")


@dataclass(frozen=True)
class ExperimentReport:
    """Per-cell counts plus the configuration that produced them."""

    approach: Approach
    cells: tuple[CellResult, ...]
    trials_per_cell: int
    grid_shape: tuple[int, int]
    config: dict[str, Any]

    @property
    def total_successes(self) -> int:
        return sum(c.successes for c in self.cells)

    @property
    def total_trials(self) -> int:
        return sum(len(c.trials) for c in self.cells)

    @property
    def overall_success_rate(self) -> float:
        return self.total_successes / self.total_trials if self.total_trials else 0.0

    def cell_result(self, cell: tuple[int, int]) -> CellResult:
        for c in self.cells:
            if c.cell == cell:
                return c
        raise RangeError(f"no results for cell {cell}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "approach": self.approach.value,
            "grid_shape": list(self.grid_shape),
            "trials_per_cell": self.trials_per_cell,
            "cells": [
                {"cell": list(c.cell), "successes": c.successes, "failures": c.failures,
                 "trials": [t.success for t in c.trials]}
                for c in self.cells
            ],
            "total_successes": self.total_successes,
            "total_trials": self.total_trials,
            "overall_success_rate": self.overall_success_rate,
            "config": self.config,
        }


def experiment_cells(config: GridExperimentConfig) -> list[tuple[int, int]]:
    """Cells in reporting order: row by row away from the aligned edge."""
    return [(i, j) for j in range(config.grid_rows) for i in range(config.grid_cols)]


def _trial_task(args: tuple[tuple[int, int], Approach, GridExperimentConfig, int, int]
                ) -> TrialResult:
    cell, approach, config, seed, trial = args
    result = run_trial(cell, approach, config, seed)
    return replace(result, trial=trial)


def run_experiment(config: GridExperimentConfig) -> ExperimentReport:
    """Sweep every grid cell with trials_per_cell attempts each.

    Trial seeds derive from (config.seed, approach, cell, trial), so
    cells and trials are independent and may run in any order or in
    parallel (PLACEPLAN_THREADS > 1) without changing the report.
    """
    tasks = []
    for cell in experiment_cells(config):
        for trial in range(config.trials_per_cell):
            seed = stable_seed(config.seed, config.approach.value, cell[0], cell[1], trial)
            tasks.append((cell, config.approach, config, seed, trial))

    threads = _thread_cap()
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_trial_task, tasks))
    else:
        results = [_trial_task(t) for t in tasks]

    by_cell: dict[tuple[int, int], list[TrialResult]] = {}
    for r in results:
        by_cell.setdefault(r.cell, []).append(r)
    cells = []
    for cell in experiment_cells(config):
        trials = sorted(by_cell.get(cell, []), key=lambda t: t.trial)
        successes = sum(1 for t in trials if t.success)
        cells.append(CellResult(cell=cell, successes=successes,
                                failures=len(trials) - successes, trials=tuple(trials)))
    return ExperimentReport(approach=config.approach, cells=tuple(cells),
                            trials_per_cell=config.trials_per_cell,
                            grid_shape=(config.grid_cols, config.grid_rows),
                            config=config.to_dict())


def _thread_cap() -> int:
    raw = os.environ.get("PLACEPLAN_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1
