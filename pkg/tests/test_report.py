"""Report serialization and drawing outputs."""

import json
import math
import re

import pytest

from placeplan.errors import FormatError
from placeplan.harness import Approach, GridExperimentConfig, run_experiment
from placeplan.planner import RobotParams, plan_placements
from placeplan.report import (
    HEATMAP_RAMP,
    composite_heatmap_ppm,
    ramp_color,
    render_report,
    render_scene_svg,
    save_heatmap_figure,
)

@pytest.fixture(scope="module")
def small_report():
    return run_experiment(GridExperimentConfig(trials_per_cell=1))


@pytest.fixture(scope="module")
def baseline_report():
    return run_experiment(GridExperimentConfig(trials_per_cell=1,
                                               approach=Approach.BASELINE))


class TestRenderReport:
    def test_json_structure(self, small_report):
        doc = json.loads(render_report(small_report, "json"))
        assert doc["approach"] == "proposed"
        assert doc["grid_shape"] == [3, 4]
        assert len(doc["cells"]) == 12
        total = sum(c["successes"] + c["failures"] for c in doc["cells"])
        assert total == doc["total_trials"]
        assert doc["overall_success_rate"] == pytest.approx(
            doc["total_successes"] / doc["total_trials"])

    def test_csv_has_header_and_12_rows(self, small_report):
        lines = render_report(small_report, "csv").decode().strip().split("\n")
        assert lines[0] == "cell_x,cell_y,approach,successes,failures,trials_per_cell"
        assert len(lines) == 13

    def test_ppm_dimensions_and_uniform_success(self, small_report):
        data = render_report(small_report, "ppm")
        header, dims, maxval, raster = data.split(b"\n", 3)
        assert header == b"P6"
        assert dims == b"120 160"        # 3*40 x 4*40
        assert maxval == b"255"
        assert len(raster) == 120 * 160 * 3
        # every proposed cell succeeds with defaults: uniform max-green image
        full_green = bytes(HEATMAP_RAMP[5])
        assert raster == full_green * (120 * 160)

    def test_ppm_mixed_colors_for_baseline(self, baseline_report):
        data = render_report(baseline_report, "ppm")
        raster = data.split(b"\n", 3)[3]
        colors = {tuple(raster[i:i + 3]) for i in range(0, len(raster), 3)}
        assert tuple(HEATMAP_RAMP[0]) in colors    # far-row failures
        assert tuple(HEATMAP_RAMP[5]) in colors    # near-row successes

    def test_far_row_rendered_red_at_image_top(self, baseline_report):
        # row y=3 of the grid fails for the baseline and is drawn topmost
        raster = render_report(baseline_report, "ppm").split(b"\n", 3)[3]
        assert tuple(raster[0:3]) == HEATMAP_RAMP[0]

    def test_svg_counts(self, small_report):
        svg = render_report(small_report, "svg").decode()
        assert svg.count('class="cell"') == 12
        assert "1/1" in svg

    def test_unknown_format(self, small_report):
        with pytest.raises(FormatError):
            render_report(small_report, "pdf")

    def test_custom_cell_px(self, small_report):
        data = render_report(small_report, "ppm", cell_px=10)
        assert data.split(b"\n", 3)[1] == b"30 40"


class TestRampColor:
    def test_endpoints(self):
        assert ramp_color(0, 5) == HEATMAP_RAMP[0]
        assert ramp_color(5, 5) == HEATMAP_RAMP[5]

    def test_scales_with_trials(self):
        assert ramp_color(3, 3) == HEATMAP_RAMP[5]
        assert ramp_color(1, 2) == ramp_color(5, 10)


class TestComposite:
    def test_side_by_side_dimensions(self, small_report, baseline_report):
        data = composite_heatmap_ppm([small_report, baseline_report], gutter_px=8)
        dims = data.split(b"\n", 3)[1]
        assert dims == b"248 160"        # 120 + 8 + 120

    def test_empty_rejected(self):
        with pytest.raises(FormatError):
            composite_heatmap_ppm([])


class TestHeatmapFigure:
    def test_writes_png(self, small_report, baseline_report, tmp_path):
        path = tmp_path / "heatmap.png"
        save_heatmap_figure([small_report, baseline_report], str(path))
        data = path.read_bytes()
        assert data[:8] == b"\x89PNG\r\n\x1a\n"
        assert len(data) > 1000


class TestSceneSvg:
    def test_scene_only(self, tabletop_scene):
        svg = render_scene_svg(tabletop_scene)
        assert svg.count('class="candidate"') == 0
        assert 'class="table"' in svg
        assert 'class="target"' in svg

    def test_candidate_arrow_count_and_angles(self, tabletop_scene, tabletop_snapshot):
        candidates = plan_placements(tabletop_snapshot, RobotParams(), keep_pruned=True)
        svg = render_scene_svg(tabletop_scene, candidates)
        arrows = re.findall(r'<g class="candidate" transform="translate\([^)]*\) '
                            r'rotate\((-?[\d.]+)\)"', svg)
        assert len(arrows) == len(candidates)
        # arrows render the candidate headings (screen angles are negated)
        for angle_text, cand in zip(arrows, candidates):
            assert float(angle_text) == pytest.approx(-math.degrees(cand.pose.heading),
                                                      abs=1e-3)
        if candidates.pruned:
            assert svg.count('class="pruned"') == len(candidates.pruned)

    def test_headings_point_at_object(self, tabletop_scene, tabletop_snapshot):
        candidates = plan_placements(tabletop_snapshot, RobotParams())
        obj = tabletop_snapshot.object
        svg = render_scene_svg(tabletop_scene, candidates)
        angles = [float(a) for a in re.findall(r'rotate\((-?[\d.]+)\)', svg)]
        for angle, cand in zip(angles, candidates):
            want = math.degrees(math.atan2(obj.position.y - cand.pose.y,
                                           obj.position.x - cand.pose.x))
            assert -angle == pytest.approx(want, abs=1e-3)
