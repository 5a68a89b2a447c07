"""Heatmaps of value grids with their zero-level contour.

Each figure is written twice: a grayscale PGM raster (mid-gray at zero) and an
SVG that embeds a colored PNG of the same slice under vector contours, region
outlines and trajectory overlays. The SVG also carries the run metadata.
"""
import base64
import io
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from PIL import Image, ImageDraw

from ras_lab.grids.values import ValueGrid
from ras_lab.simulation.rollout import TrajectoryRecord
from ras_lab.systems.benchmarks import Region
from ras_lab.utils.exceptions import SliceError

logger = logging.getLogger(__name__)

Point = Tuple[float, float]
Segment = Tuple[Point, Point]

NEGATIVE_RGB = np.array([33.0, 102.0, 172.0])
ZERO_RGB = np.array([247.0, 247.0, 247.0])
POSITIVE_RGB = np.array([178.0, 24.0, 43.0])


@dataclass(frozen=True)
class SliceSpec:
    """Two state dimensions spanning the plane, the others held at ``fixed``."""

    axes: Tuple[int, int] = (0, 1)
    fixed: Tuple[float, ...] = ()

    def plane(self, value: ValueGrid) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Node coordinates along both axes and the values on the plane, indexed ``[x, y]``."""
        spec = value.spec
        axes = tuple(int(axis) for axis in self.axes)
        if len(axes) != 2 or axes[0] == axes[1] or not all(0 <= axis < spec.ndim for axis in axes):
            raise SliceError("A slice needs two distinct grid dimensions.", {"axes": list(axes), "ndim": spec.ndim})
        others = [axis for axis in range(spec.ndim) if axis not in axes]
        fixed = list(self.fixed) or [0.0] * len(others)
        if len(fixed) != len(others):
            raise SliceError(
                "A slice fixes every dimension outside the plane.", {"fixed": list(self.fixed), "expected": len(others)}
            )
        xs, ys = spec.axis(axes[0]), spec.axis(axes[1])
        states = np.empty((len(xs), len(ys), spec.ndim))
        states[..., axes[0]] = xs[:, None]
        states[..., axes[1]] = ys[None, :]
        for axis, coordinate in zip(others, fixed):
            states[..., axis] = coordinate
        return xs, ys, value(states)


def zero_contour(xs: np.ndarray, ys: np.ndarray, values: np.ndarray, level: float = 0.0) -> List[Segment]:
    """Marching squares on the sign of ``values - level``.

    Saddle cells are resolved by the sign of the cell mean.
    """
    shifted = np.asarray(values, dtype=float) - level
    above = shifted > 0
    corner = above[:-1, :-1]
    mixed = (corner != above[1:, :-1]) | (corner != above[1:, 1:]) | (corner != above[:-1, 1:])
    segments: List[Segment] = []
    for i, j in zip(*np.nonzero(mixed)):
        corners = ((i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1))
        crossings: List[Optional[Point]] = []
        for k in range(4):
            a, b = corners[k], corners[(k + 1) % 4]
            va, vb = shifted[a], shifted[b]
            if (va > 0) == (vb > 0):
                crossings.append(None)
                continue
            t = va / (va - vb)
            crossings.append((xs[a[0]] + t * (xs[b[0]] - xs[a[0]]), ys[a[1]] + t * (ys[b[1]] - ys[a[1]])))
        points = [point for point in crossings if point is not None]
        if len(points) == 2:
            segments.append((points[0], points[1]))
        elif (shifted[i : i + 2, j : j + 2].mean() > 0) == (shifted[i, j] > 0):
            segments.extend([(crossings[0], crossings[1]), (crossings[2], crossings[3])])
        else:
            segments.extend([(crossings[3], crossings[0]), (crossings[1], crossings[2])])
    return segments


@dataclass
class Figure:
    pgm: Path
    svg: Path
    contour: List[Segment]


class _Canvas:
    """Maps state coordinates on the plane to pixel centers of the raster."""

    def __init__(self, xs: np.ndarray, ys: np.ndarray, scale: int):
        self.xs, self.ys, self.scale = xs, ys, scale
        self.width, self.height = len(xs) * scale, len(ys) * scale

    def pixel(self, x: float, y: float) -> Point:
        u = (x - self.xs[0]) / (self.xs[1] - self.xs[0])
        v = (y - self.ys[0]) / (self.ys[1] - self.ys[0])
        return (u + 0.5) * self.scale, (len(self.ys) - 1 - v + 0.5) * self.scale


def _normalized(values: np.ndarray) -> np.ndarray:
    peak = float(np.max(np.abs(values)))
    return values / peak if peak > 0 else np.zeros_like(values)


def _raster(values: np.ndarray, scale: int) -> np.ndarray:
    # rows run along y from the top of the image
    return np.repeat(np.repeat(values.T[::-1], scale, axis=0), scale, axis=1)


def grayscale(values: np.ndarray, scale: int) -> Image.Image:
    levels = np.clip(np.rint(128.0 + 127.0 * _normalized(values)), 0, 255).astype(np.uint8)
    return Image.fromarray(_raster(levels, scale), mode="L")


def diverging(values: np.ndarray, scale: int) -> Image.Image:
    norm = _raster(_normalized(values), scale)[..., None]
    rgb = np.where(norm < 0, ZERO_RGB + (ZERO_RGB - NEGATIVE_RGB) * norm, ZERO_RGB + (POSITIVE_RGB - ZERO_RGB) * norm)
    return Image.fromarray(np.rint(rgb).astype(np.uint8), mode="RGB")


def _region_svg(region: Region, axes: Tuple[int, int], canvas: _Canvas) -> str:
    if region.kind == "band" and region.axes[0] in axes:
        low, high = region.center[0] - region.radius, region.center[0] + region.radius
        if region.axes[0] == axes[0]:
            (x0, _), (x1, _) = canvas.pixel(low, canvas.ys[0]), canvas.pixel(high, canvas.ys[0])
            return f'<rect x="{x0:.2f}" y="0" width="{x1 - x0:.2f}" height="{canvas.height}"/>'
        (_, y1), (_, y0) = canvas.pixel(canvas.xs[0], low), canvas.pixel(canvas.xs[0], high)
        return f'<rect x="0" y="{y0:.2f}" width="{canvas.width}" height="{y1 - y0:.2f}"/>'
    if region.kind == "disk" and tuple(region.axes[:2]) in (axes, axes[::-1]):
        center = dict(zip(region.axes, region.center))
        cx, cy = canvas.pixel(center[axes[0]], center[axes[1]])
        rx = region.radius / (canvas.xs[1] - canvas.xs[0]) * canvas.scale
        ry = region.radius / (canvas.ys[1] - canvas.ys[0]) * canvas.scale
        return f'<ellipse cx="{cx:.2f}" cy="{cy:.2f}" rx="{rx:.2f}" ry="{ry:.2f}"/>'
    return ""


def _polyline(points: Iterable[Point]) -> str:
    return " ".join(f"{x:.2f},{y:.2f}" for x, y in points)


def render_heatmap(
    value: ValueGrid,
    slice_spec: SliceSpec,
    stem: Path,
    regions: Optional[Dict[str, Region]] = None,
    trajectories: Sequence[TrajectoryRecord] = (),
    meta: Optional[Dict[str, Any]] = None,
    scale: int = 3,
) -> Figure:
    """Write ``<stem>.pgm`` and ``<stem>.svg`` for one slice of ``value``."""
    xs, ys, plane = slice_spec.plane(value)
    axes = tuple(slice_spec.axes)
    canvas = _Canvas(xs, ys, scale)
    contour = zero_contour(xs, ys, plane)
    pixel_segments = [(canvas.pixel(*a), canvas.pixel(*b)) for a, b in contour]
    paths = [
        [canvas.pixel(state[axes[0]], state[axes[1]]) for state in record.states] for record in trajectories
    ]

    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    image = grayscale(plane, scale)
    draw = ImageDraw.Draw(image)
    for segment in pixel_segments:
        draw.line(segment, fill=0)
    for path in paths:
        if len(path) > 1:
            draw.line(path, fill=255)
    pgm = stem.with_suffix(".pgm")
    image.save(pgm, format="PPM")

    buffer = io.BytesIO()
    diverging(plane, scale).save(buffer, format="PNG")
    encoded = base64.b64encode(buffer.getvalue()).decode("ascii")
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{canvas.width}" height="{canvas.height}" '
        f'viewBox="0 0 {canvas.width} {canvas.height}">',
        f"<title>{value.label or stem.name}</title>",
        f"<metadata>{json.dumps(meta or {}, sort_keys=True)}</metadata>",
        f'<image width="{canvas.width}" height="{canvas.height}" href="data:image/png;base64,{encoded}"/>',
    ]
    outlines = [_region_svg(region, axes, canvas) for _, region in sorted((regions or {}).items())]
    if any(outlines):
        lines.append('<g id="regions" fill="none" stroke="#333333" stroke-dasharray="4 2">')
        lines.extend(outline for outline in outlines if outline)
        lines.append("</g>")
    lines.append('<g id="zero-level" stroke="#000000" stroke-width="1.5">')
    lines.extend(
        f'<line x1="{a[0]:.2f}" y1="{a[1]:.2f}" x2="{b[0]:.2f}" y2="{b[1]:.2f}"/>' for a, b in pixel_segments
    )
    lines.append("</g>")
    if paths:
        lines.append('<g id="trajectories" fill="none" stroke="#1a9850" stroke-width="1.2">')
        for record, path in zip(trajectories, paths):
            lines.append(f'<polyline points="{_polyline(path)}"/>')
            for t in _switches(record):
                x, y = path[t]
                lines.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="#1a9850"/>')
        lines.append("</g>")
    lines.append("</svg>")
    svg = stem.with_suffix(".svg")
    svg.write_text("\n".join(lines) + "\n")
    logger.info("Wrote %s and %s", pgm, svg)
    return Figure(pgm=pgm, svg=svg, contour=contour)


def _switches(record: TrajectoryRecord) -> List[int]:
    """Steps where a switching policy changes branch."""
    if not record.branches:
        return []
    return [t for t in range(1, len(record.branches)) if record.branches[t] != record.branches[t - 1]]
