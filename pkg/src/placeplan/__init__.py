"""Base placement planning for mobile pick-up tasks.

The package generates, prunes and ranks robot base poses around a
target object, executes the pickup through a pluggable motion backend,
and ships a deterministic tabletop experiment harness with report and
heatmap rendering.
"""

from .errors import (
    ConfigError,
    EmptySetError,
    FormatError,
    GeometryError,
    ParamError,
    ParseError,
    PlaceplanError,
    RangeError,
)
from .executor import (
    Attempt,
    ExecutionOutcome,
    ExecutionStatus,
    MotionBackend,
    MotionCostWeights,
    NavModel,
    NavResult,
    PickupModel,
    SimulatedBackend,
    execute_pickup,
    motion_cost,
    select_best,
)
from .geometry import (
    Frame,
    OrientedBox,
    Point3,
    Pose2D,
    RigidTransform2D,
    box_contains,
    normalize_angle,
    transform_pose,
)
from .harness import (
    Approach,
    CellResult,
    ExperimentReport,
    GridExperimentConfig,
    TrialResult,
    build_cell_scene,
    cell_center,
    run_experiment,
    run_trial,
    stable_seed,
)
from .mapio import load_cloud, load_grid, load_scene, save_cloud
from .planner import (
    CandidateSet,
    PlacementCandidate,
    RadialVectorSet,
    RobotParams,
    body_box,
    count_points_in_box,
    default_angle_increment,
    footprint_occupied,
    generate_radial_vectors,
    has_collision_risk,
    plan_placements,
    reach_box,
)
from .report import render_report, render_scene_svg, save_heatmap_figure
from .scene import (
    CellState,
    ObjectObservation,
    ObjectSpec,
    OccupancyGrid,
    PointCloud,
    SceneDescription,
    SceneSnapshot,
    TableSpec,
    observe_object,
    snapshot_scene,
    synthesize_cloud,
    synthesize_grid,
)

__version__ = "0.1.0"
