"""Report rendering: delimited outputs, heatmaps, and scene drawings.

The PPM and SVG heatmaps are written by hand so their bytes are stable
across runs; the PNG figure goes through matplotlib for human eyes and
carries the same color ramp.  Cell (0, 0) is drawn at the bottom-left,
matching the table-frame coordinates.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Sequence

from .errors import FormatError
from .harness import ExperimentReport
from .planner import CandidateSet
from .scene import SceneDescription

DEFAULT_CELL_PX = 40

# Six-step ramp from all-failures red to all-successes green; a cell's
# step is round(5 * successes / trials).
HEATMAP_RAMP: tuple[tuple[int, int, int], ...] = (
    (204, 37, 32),     # 0 of 5
    (214, 105, 35),    # 1 of 5
    (222, 162, 38),    # 2 of 5
    (188, 191, 51),    # 3 of 5
    (125, 180, 62),    # 4 of 5
    (58, 165, 71),     # 5 of 5
)


def ramp_color(successes: int, trials: int) -> tuple[int, int, int]:
    """Map a success count onto the 6-step ramp."""
    if trials <= 0:
        return HEATMAP_RAMP[0]
    step = int(round(5.0 * successes / trials))
    return HEATMAP_RAMP[max(0, min(5, step))]


def render_report(report: ExperimentReport, format: str,
                  cell_px: int = DEFAULT_CELL_PX) -> bytes:
    """Serialize one experiment report as json, csv, ppm or svg bytes."""
    if format == "json":
        return (json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n").encode()
    if format == "csv":
        return _report_csv(report).encode()
    if format == "ppm":
        return _heatmap_ppm(report, cell_px)
    if format == "svg":
        return _heatmap_svg(report, cell_px).encode()
    raise FormatError(f"unsupported report format {format!r}")


def _report_csv(report: ExperimentReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["cell_x", "cell_y", "approach", "successes", "failures",
                     "trials_per_cell"])
    for c in report.cells:
        writer.writerow([c.cell[0], c.cell[1], report.approach.value, c.successes,
                         c.failures, len(c.trials)])
    return buf.getvalue()


def _cell_grid(report: ExperimentReport) -> dict[tuple[int, int], tuple[int, int]]:
    return {c.cell: (c.successes, len(c.trials)) for c in report.cells}


def _heatmap_ppm(report: ExperimentReport, cell_px: int) -> bytes:
    """Binary P6 image, one flat-color block per grid cell.

    Row 0 of the experiment grid is drawn at the bottom of the image.
    """
    cols, rows = report.grid_shape
    width = cols * cell_px
    height = rows * cell_px
    counts = _cell_grid(report)
    raster = bytearray(width * height * 3)
    for (i, j), (succ, trials) in counts.items():
        r, g, b = ramp_color(succ, trials)
        y_top = (rows - 1 - j) * cell_px
        for py in range(y_top, y_top + cell_px):
            row_off = py * width * 3
            for px in range(i * cell_px, (i + 1) * cell_px):
                off = row_off + px * 3
                raster[off] = r
                raster[off + 1] = g
                raster[off + 2] = b
    header = f"P6\n{width} {height}\n255\n".encode()
    return header + bytes(raster)


def _heatmap_svg(report: ExperimentReport, cell_px: int) -> str:
    cols, rows = report.grid_shape
    width = cols * cell_px
    height = rows * cell_px
    counts = _cell_grid(report)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<title>{report.approach.value} successes per cell</title>',
    ]
    for (i, j), (succ, trials) in sorted(counts.items()):
        r, g, b = ramp_color(succ, trials)
        x = i * cell_px
        y = (rows - 1 - j) * cell_px
        parts.append(f'<rect class="cell" x="{x}" y="{y}" width="{cell_px}" '
                     f'height="{cell_px}" fill="rgb({r},{g},{b})"/>')
        parts.append(f'<text x="{x + cell_px / 2:g}" y="{y + cell_px / 2:g}" '
                     f'text-anchor="middle" dominant-baseline="central" '
                     f'font-size="{cell_px // 3}" fill="white">{succ}/{trials}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def composite_heatmap_ppm(reports: Sequence[ExperimentReport],
                          cell_px: int = DEFAULT_CELL_PX, gutter_px: int = 8) -> bytes:
    """Side-by-side panels, one per report, separated by white gutters."""
    if not reports:
        raise FormatError("no reports to render")
    panels = [_heatmap_ppm(r, cell_px) for r in reports]
    sizes = []
    rasters = []
    for p in panels:
        head, w, h, _maxv, body = _split_ppm(p)
        sizes.append((w, h))
        rasters.append(body)
    height = max(h for _, h in sizes)
    width = sum(w for w, _ in sizes) + gutter_px * (len(panels) - 1)
    out = bytearray(b"\xff" * (width * height * 3))
    x0 = 0
    for (w, h), body in zip(sizes, rasters):
        for py in range(h):
            src = py * w * 3
            dst = (py * width + x0) * 3
            out[dst:dst + w * 3] = body[src:src + w * 3]
        x0 += w + gutter_px
    return f"P6\n{width} {height}\n255\n".encode() + bytes(out)


def _split_ppm(data: bytes) -> tuple[bytes, int, int, int, bytes]:
    parts = data.split(b"\n", 3)
    w, h = (int(t) for t in parts[1].split())
    return parts[0], w, h, int(parts[2]), parts[3]


def save_heatmap_figure(reports: Sequence[ExperimentReport], path: str) -> None:
    """Matplotlib rendition of the heatmaps, one panel per approach."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib.colors import ListedColormap

    cmap = ListedColormap([tuple(v / 255.0 for v in c) for c in HEATMAP_RAMP])
    fig, axes = plt.subplots(1, max(1, len(reports)),
                             figsize=(3.2 * max(1, len(reports)), 4.2), squeeze=False)
    for ax, report in zip(axes[0], reports):
        cols, rows = report.grid_shape
        img = [[0] * cols for _ in range(rows)]
        notes = []
        for c in report.cells:
            trials = len(c.trials)
            img[c.cell[1]][c.cell[0]] = round(5.0 * c.successes / trials) if trials else 0
            notes.append((c.cell[0], c.cell[1], c.successes, trials))
        ax.imshow(img, cmap=cmap, vmin=0, vmax=5, origin="lower")
        for i, j, succ, trials in notes:
            ax.text(i, j, f"{succ}/{trials}", ha="center", va="center",
                    color="white", fontsize=11)
        ax.set_title(report.approach.value)
        ax.set_xticks(range(cols))
        ax.set_yticks(range(rows))
        ax.set_xlabel("cell x")
        ax.set_ylabel("cell y")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_scene_svg(scene: SceneDescription, candidates: CandidateSet | None = None,
                     scale: float = 120.0, pad: float = 1.2) -> str:
    """Top-down drawing: table, obstacles, target marker, candidate arrows.

    Accepted candidates are green arrows pointing along their headings;
    pruned probes, when present in the candidate set, are red crosses.
    """
    from .scene import observe_object

    xs: list[float] = []
    ys: list[float] = []
    has_table = scene.table.width > 0 and scene.table.length > 0
    table_corners = scene.table_box().footprint_corners() if has_table else []
    for px, py in table_corners:
        xs.append(px)
        ys.append(py)
    for obs in scene.obstacles:
        for px, py in obs.footprint_corners():
            xs.append(px)
            ys.append(py)
    xs.append(scene.robot_start.x)
    ys.append(scene.robot_start.y)
    if candidates is not None:
        for c in candidates:
            xs.append(c.pose.x)
            ys.append(c.pose.y)
        for p in candidates.pruned:
            xs.append(p.position[0])
            ys.append(p.position[1])

    x_lo, x_hi = min(xs) - pad, max(xs) + pad
    y_lo, y_hi = min(ys) - pad, max(ys) + pad
    width = (x_hi - x_lo) * scale
    height = (y_hi - y_lo) * scale

    def sx(x: float) -> float:
        return (x - x_lo) * scale

    def sy(y: float) -> float:
        return (y_hi - y) * scale

    def polygon(points: list[tuple[float, float]], fill: str, cls: str) -> str:
        coords = " ".join(f"{sx(px):.2f},{sy(py):.2f}" for px, py in points)
        return f'<polygon class="{cls}" points="{coords}" fill="{fill}" stroke="black"/>'

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}" '
        f'viewBox="0 0 {width:.2f} {height:.2f}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    if table_corners:
        parts.append(polygon(table_corners, "#d9c7a0", "table"))
    for obs in scene.obstacles:
        parts.append(polygon(obs.footprint_corners(), "#8a8a8a", "obstacle"))

    if scene.target_id:
        target = observe_object(scene)
        parts.append(f'<circle class="target" cx="{sx(target.position.x):.2f}" '
                     f'cy="{sy(target.position.y):.2f}" r="{0.04 * scale:.2f}" '
                     f'fill="#1f4fd8"/>')

    parts.append(f'<circle class="robot-start" cx="{sx(scene.robot_start.x):.2f}" '
                 f'cy="{sy(scene.robot_start.y):.2f}" r="{0.06 * scale:.2f}" '
                 f'fill="none" stroke="#555" stroke-width="2"/>')

    if candidates is not None:
        for p in candidates.pruned:
            cx, cy = sx(p.position[0]), sy(p.position[1])
            d = 0.04 * scale
            parts.append(f'<g class="pruned" stroke="#cc2520" stroke-width="2">'
                         f'<line x1="{cx - d:.2f}" y1="{cy - d:.2f}" x2="{cx + d:.2f}" '
                         f'y2="{cy + d:.2f}"/>'
                         f'<line x1="{cx - d:.2f}" y1="{cy + d:.2f}" x2="{cx + d:.2f}" '
                         f'y2="{cy - d:.2f}"/></g>')
        arrow_len = 0.18 * scale
        for c in candidates:
            # screen rotation is negated because the y axis points down
            deg = -math.degrees(c.pose.heading)
            parts.append(
                f'<g class="candidate" '
                f'transform="translate({sx(c.pose.x):.2f},{sy(c.pose.y):.2f}) '
                f'rotate({deg:.4f})" stroke="#2f9e44" fill="#2f9e44">'
                f'<line x1="0" y1="0" x2="{arrow_len:.2f}" y2="0" stroke-width="2"/>'
                f'<polygon points="{arrow_len:.2f},0 {arrow_len - 6:.2f},-3 '
                f'{arrow_len - 6:.2f},3"/></g>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
