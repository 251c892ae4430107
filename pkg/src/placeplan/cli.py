"""Command-line interface.

Subcommands: `plan` (candidate generation), `simulate` (one pickup
trial), `benchmark` (the full grid experiment) and `render` (scene +
candidate drawing).  Exit codes are stable for scripting: 0 success,
1 input error, 2 planning produced no candidates, 3 execution failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .errors import PlaceplanError
from .executor import SimulatedBackend, execute_pickup
from .geometry import transform_pose
from .harness import (
    Approach,
    GridExperimentConfig,
    config_from_dict,
    run_baseline,
    run_experiment,
    stable_seed,
)
from .mapio import (
    load_cloud,
    load_grid,
    load_scene,
    observation_from_dict,
)
from .planner import CandidateSet, RobotParams, plan_placements
from .report import (
    composite_heatmap_ppm,
    render_report,
    render_scene_svg,
    save_heatmap_figure,
)
from .scene import (
    DEFAULT_DENSITY,
    DEFAULT_MARGIN,
    DEFAULT_RESOLUTION,
    SceneSnapshot,
    snapshot_scene,
)

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_NO_CANDIDATES = 2
EXIT_EXECUTION_FAILED = 3


def _read_text(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise PlaceplanError(f"no such file: {path}")
    return p.read_text()


def _read_bytes(path: str) -> bytes:
    p = Path(path)
    if not p.is_file():
        raise PlaceplanError(f"no such file: {path}")
    return p.read_bytes()


def _load_params(path: str | None) -> RobotParams:
    if path is None:
        return RobotParams()
    return RobotParams.from_json(_read_text(path))


def _snapshot_from_args(args: argparse.Namespace) -> tuple[SceneSnapshot, object | None]:
    """Build the planner inputs from either a scene file or raw sensor files."""
    if args.scene:
        scene = load_scene(_read_text(args.scene))
        snapshot = snapshot_scene(scene, density=args.density, resolution=args.resolution,
                                  margin=args.margin, seed=args.seed)
        return snapshot, scene
    if not (args.grid and args.grid_meta and args.cloud and args.object):
        raise PlaceplanError(
            "either --scene or all of --grid/--grid-meta/--cloud/--object are required")
    grid = load_grid(_read_bytes(args.grid), _read_text(args.grid_meta))
    cloud = load_cloud(_read_text(args.cloud))
    obs = observation_from_dict(json.loads(_read_text(args.object)))
    return SceneSnapshot(cloud=cloud, grid=grid, object=obs), None


def cmd_plan(args: argparse.Namespace) -> int:
    snapshot, _scene = _snapshot_from_args(args)
    params = _load_params(args.params)
    candidates = plan_placements(snapshot, params, keep_pruned=True)
    Path(args.out).write_text(candidates.to_json() + "\n")
    print(f"{len(candidates)} candidates, {len(candidates.pruned)} probes pruned",
          file=sys.stderr)
    if args.json:
        print(candidates.to_json())
    return EXIT_OK if len(candidates) else EXIT_NO_CANDIDATES


def cmd_simulate(args: argparse.Namespace) -> int:
    scene = load_scene(_read_text(args.scene))
    params = _load_params(args.params)
    snapshot = snapshot_scene(scene, density=args.density, resolution=args.resolution,
                              margin=args.margin, seed=stable_seed(args.seed, "scene"))
    backend = SimulatedBackend(snapshot, params, start_pose=scene.robot_start,
                               seed=stable_seed(args.seed, "backend"))
    if args.approach == "proposed":
        candidates = plan_placements(snapshot, params)
        outcome = execute_pickup(snapshot.object.position, candidates, backend)
    else:
        goal = transform_pose(
            GridExperimentConfig(table_height=scene.table.height,
                                 table_width=scene.table.width,
                                 table_length=scene.table.length,
                                 table_center=scene.table.center).resolved_baseline_goal(),
            scene.table_to_map())
        outcome = run_baseline(snapshot, backend, goal)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    with (out_dir / "attempts.jsonl").open("w") as fh:
        for k, attempt in enumerate(outcome.attempts):
            fh.write(json.dumps({"attempt_index": k, **attempt.to_dict()},
                                sort_keys=True) + "\n")
    (out_dir / "outcome.json").write_text(
        json.dumps(outcome.to_dict(), indent=2, sort_keys=True) + "\n")
    if args.json:
        print(json.dumps(outcome.to_dict(), sort_keys=True))
    else:
        print(f"{args.approach}: {outcome.status.value}", file=sys.stderr)
    return EXIT_OK if outcome.succeeded else EXIT_EXECUTION_FAILED


def cmd_benchmark(args: argparse.Namespace) -> int:
    if args.config:
        doc = json.loads(_read_text(args.config))
        base, approaches = config_from_dict(doc)
    else:
        base, approaches = GridExperimentConfig(), [Approach.PROPOSED, Approach.BASELINE]

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    reports = [run_experiment(replace(base, approach=a)) for a in approaches]

    combined = {r.approach.value: r.to_dict() for r in reports}
    (out_dir / "report.json").write_text(json.dumps(combined, indent=2, sort_keys=True) + "\n")

    csv_chunks = []
    for n, r in enumerate(reports):
        text = render_report(r, "csv").decode()
        csv_chunks.append(text if n == 0 else text.split("\n", 1)[1])
    (out_dir / "report.csv").write_text("".join(csv_chunks))

    (out_dir / "heatmap.ppm").write_bytes(composite_heatmap_ppm(reports))
    svg_parts = [render_report(r, "svg").decode() for r in reports]
    (out_dir / "heatmap.svg").write_text(_stack_svgs(svg_parts))
    save_heatmap_figure(reports, str(out_dir / "heatmap.png"))

    with (out_dir / "attempts.jsonl").open("w") as fh:
        for r in reports:
            for cell_result in r.cells:
                for trial in cell_result.trials:
                    for k, attempt in enumerate(trial.outcome.attempts):
                        record = {"approach": r.approach.value,
                                  "cell": list(cell_result.cell),
                                  "trial": trial.trial, "attempt_index": k,
                                  **attempt.to_dict()}
                        fh.write(json.dumps(record, sort_keys=True) + "\n")

    summary = {r.approach.value: round(r.overall_success_rate, 4) for r in reports}
    if args.json:
        print(json.dumps(summary, sort_keys=True))
    else:
        for name, rate in summary.items():
            print(f"{name}: success rate {rate:.1%}", file=sys.stderr)
    return EXIT_OK


def _stack_svgs(svgs: list[str]) -> str:
    """Wrap per-approach heatmap SVGs side by side in one document."""
    import re

    panels = []
    x = 0.0
    height = 0.0
    for svg in svgs:
        m = re.search(r'width="([\d.]+)" height="([\d.]+)"', svg)
        w, h = (float(m.group(1)), float(m.group(2))) if m else (160.0, 160.0)
        body = svg.strip()
        panels.append(f'<g transform="translate({x:g},0)">{body}</g>')
        x += w + 10
        height = max(height, h)
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{x - 10:g}" '
            f'height="{height:g}">' + "\n".join(panels) + "</svg>\n")


def cmd_render(args: argparse.Namespace) -> int:
    scene = load_scene(_read_text(args.scene))
    candidates = None
    if args.candidates:
        candidates = CandidateSet.from_json(_read_text(args.candidates))
    svg = render_scene_svg(scene, candidates)
    Path(args.out).write_text(svg)
    n = len(candidates) if candidates is not None else 0
    print(f"rendered scene with {n} candidates to {args.out}", file=sys.stderr)
    return EXIT_OK


def _add_synth_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--density", type=float, default=DEFAULT_DENSITY,
                        help="cloud sampling density, points per square meter")
    parser.add_argument("--resolution", type=float, default=DEFAULT_RESOLUTION,
                        help="occupancy grid resolution in meters")
    parser.add_argument("--margin", type=float, default=DEFAULT_MARGIN,
                        help="free margin synthesized around the scene, meters")
    parser.add_argument("--seed", type=int, default=0, help="seed for all randomness")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="placeplan",
                                     description="Base placement planning and tabletop "
                                                 "pickup simulation")
    parser.add_argument("--json", action="store_true",
                        help="machine-readable stdout instead of human summaries")
    sub = parser.add_subparsers(dest="command", required=True)

    p_plan = sub.add_parser("plan", help="generate base placement candidates")
    p_plan.add_argument("--scene", help="scene JSON file (synthesized inputs)")
    p_plan.add_argument("--grid", help="occupancy map PGM image")
    p_plan.add_argument("--grid-meta", help="occupancy map YAML metadata")
    p_plan.add_argument("--cloud", help="point cloud XYZ CSV file")
    p_plan.add_argument("--object", help="object observation JSON file")
    p_plan.add_argument("--params", help="robot parameter JSON file")
    p_plan.add_argument("--out", required=True, help="output candidate JSON file")
    _add_synth_flags(p_plan)
    p_plan.set_defaults(func=cmd_plan)

    p_sim = sub.add_parser("simulate", help="run one simulated pickup trial")
    p_sim.add_argument("--scene", required=True, help="scene JSON file")
    p_sim.add_argument("--params", help="robot parameter JSON file")
    p_sim.add_argument("--approach", choices=["proposed", "baseline"], default="proposed")
    p_sim.add_argument("--out", required=True, help="output directory")
    _add_synth_flags(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_bench = sub.add_parser("benchmark", help="run the tabletop grid experiment")
    p_bench.add_argument("--config", help="benchmark config JSON (defaults when omitted)")
    p_bench.add_argument("--out", required=True, help="output directory")
    p_bench.set_defaults(func=cmd_benchmark)

    p_render = sub.add_parser("render", help="draw a scene and its candidates as SVG")
    p_render.add_argument("--scene", required=True, help="scene JSON file")
    p_render.add_argument("--candidates", help="candidate JSON file from `plan`")
    p_render.add_argument("--out", required=True, help="output SVG file")
    p_render.set_defaults(func=cmd_render)
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (PlaceplanError, LookupError, OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
