"""Resolution-independent SVG overlays for figures and debugging."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .geometry import Homog3
from .metrology import Calibration, Measurement

_COL_LINE = "#d94801"
_COL_SNAP = "#2171b5"
_COL_BASE = "#238b45"
_COL_RAW = "#888888"
_COL_ALIGNED = "#2171b5"
_COL_WIRE = "#555555"
_COL_POINT = "#c51b8a"


class SvgCanvas:
    """Minimal SVG writer in pixel coordinates (y down, like the image)."""

    def __init__(self):
        self._items: list[str] = []
        self._min = None
        self._max = None

    def _require(self, x: float, y: float) -> None:
        if self._min is None:
            self._min = [x, y]
            self._max = [x, y]
        else:
            self._min = [min(self._min[0], x), min(self._min[1], y)]
            self._max = [max(self._max[0], x), max(self._max[1], y)]

    def line(self, p, q, color: str, width: float = 1.5, dash: str | None = None):
        self._require(*p)
        self._require(*q)
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        self._items.append(
            f'<line x1="{p[0]:.3f}" y1="{p[1]:.3f}" x2="{q[0]:.3f}" y2="{q[1]:.3f}" '
            f'stroke="{color}" stroke-width="{width}"{dash_attr}/>'
        )

    def circle(self, p, radius: float, color: str, fill: bool = True):
        self._require(p[0] - radius, p[1] - radius)
        self._require(p[0] + radius, p[1] + radius)
        fill_attr = color if fill else "none"
        self._items.append(
            f'<circle cx="{p[0]:.3f}" cy="{p[1]:.3f}" r="{radius:.3f}" '
            f'fill="{fill_attr}" stroke="{color}" stroke-width="1.5"/>'
        )

    def cross_marker(self, p, size: float, color: str):
        x, y = p
        self.line((x - size, y - size), (x + size, y + size), color)
        self.line((x - size, y + size), (x + size, y - size), color)

    def text(self, p, content: str, color: str = "#222222", size: float = 14.0):
        self._require(*p)
        self._items.append(
            f'<text x="{p[0]:.3f}" y="{p[1]:.3f}" fill="{color}" '
            f'font-size="{size:.1f}" font-family="sans-serif">{content}</text>'
        )

    def save(self, path: str | Path) -> None:
        if self._min is None:
            self._min = [0.0, 0.0]
            self._max = [1.0, 1.0]
        pad = 0.08 * max(
            self._max[0] - self._min[0], self._max[1] - self._min[1], 1.0
        )
        x0, y0 = self._min[0] - pad, self._min[1] - pad
        w = self._max[0] - self._min[0] + 2 * pad
        h = self._max[1] - self._min[1] + 2 * pad
        body = "\n".join(self._items)
        Path(path).write_text(
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0:.3f} {y0:.3f} '
            f'{w:.3f} {h:.3f}" width="{w:.0f}" height="{h:.0f}">\n'
            f'<rect x="{x0:.3f}" y="{y0:.3f}" width="{w:.3f}" height="{h:.3f}" '
            'fill="#ffffff"/>\n'
            f"{body}\n</svg>\n",
            encoding="utf-8",
        )


def _line_bbox_segment(line: Homog3, x0, y0, x1, y1):
    """Intersection segment of a homogeneous line with a pixel box, or None."""
    lv = line.vec
    candidates = []
    borders = [
        np.array([1.0, 0.0, -x0]),
        np.array([1.0, 0.0, -x1]),
        np.array([0.0, 1.0, -y0]),
        np.array([0.0, 1.0, -y1]),
    ]
    for b in borders:
        p = np.cross(lv, b)
        if abs(p[2]) < 1e-12:
            continue
        x, y = p[0] / p[2], p[1] / p[2]
        if x0 - 1e-6 <= x <= x1 + 1e-6 and y0 - 1e-6 <= y <= y1 + 1e-6:
            candidates.append((x, y))
    uniq = []
    for c in candidates:
        if all(abs(c[0] - u[0]) + abs(c[1] - u[1]) > 1e-6 for u in uniq):
            uniq.append(c)
    if len(uniq) < 2:
        return None
    return uniq[0], uniq[1]


def render_measurement_overlay(
    cal: Calibration, m: Measurement, path: str | Path
) -> None:
    """Draw the vanishing line, the snap construction, and the result."""
    canvas = SvgCanvas()
    b = np.array(m.b_x.xy())
    t_raw = np.array(m.t_x_raw.xy())
    t = np.array(m.t_x_aligned.xy())
    b_r = np.array(cal.b_r.xy())
    t_r = np.array(cal.t_r.xy())

    pts = np.vstack([b, t_raw, t, b_r, t_r])
    span = max(float(np.ptp(pts, axis=0).max()), 50.0)
    x0, y0 = pts.min(axis=0) - 0.4 * span
    x1, y1 = pts.max(axis=0) + 0.4 * span

    horizon = _line_bbox_segment(cal.l, x0, y0, x1, y1)
    if horizon is not None:
        canvas.line(*horizon, color=_COL_LINE, dash="8 5")
        canvas.text(horizon[0], "vanishing line", color=_COL_LINE)

    # Reference segment for context.
    canvas.line(b_r, t_r, color=_COL_BASE, width=1.0, dash="3 3")
    canvas.circle(b_r, 3.0, _COL_BASE, fill=False)
    canvas.circle(t_r, 3.0, _COL_BASE, fill=False)

    # Snap line through base toward the vanishing point.
    direction = t - b
    norm = float(np.linalg.norm(direction))
    if norm > 1e-9:
        direction /= norm
        canvas.line(
            b - 0.15 * span * direction,
            t + 0.25 * span * direction,
            color=_COL_SNAP,
            width=1.0,
            dash="5 4",
        )
    canvas.line(b, t, color=_COL_ALIGNED, width=2.0)
    canvas.circle(b, 4.0, _COL_BASE)
    canvas.cross_marker(t_raw, 5.0, _COL_RAW)
    if float(np.linalg.norm(t_raw - t)) > 1e-6:
        canvas.line(t_raw, t, color=_COL_RAW, width=1.0, dash="2 3")
    canvas.circle(t, 4.0, _COL_ALIGNED)
    canvas.text(
        t + np.array([8.0, -8.0]),
        f"{m.Z_x:.1f} mm",
        color=_COL_ALIGNED,
    )
    canvas.save(path)


def render_wireframe(scene, path: str | Path) -> None:
    """Projected face outlines, correspondence points, and test objects."""
    from .synthetic import face_placements, project

    canvas = SvgCanvas()
    places = face_placements(scene.config.reference)
    for fid, place in places.items():
        face = scene.config.reference.face(fid)
        corners = [
            project(scene.camera, place.world_point(u, w)).xy()
            for u, w in [
                (0, 0),
                (face.width, 0),
                (face.width, face.height),
                (0, face.height),
            ]
        ]
        for i in range(4):
            canvas.line(corners[i], corners[(i + 1) % 4], color=_COL_WIRE)
        canvas.text(corners[0], fid, color=_COL_WIRE, size=12.0)
        for corr in scene.correspondences[fid]:
            canvas.circle(corr.image, 1.5, _COL_POINT)
    for obj in scene.objects:
        b = obj.base_image.xy()
        t = obj.top_image.xy()
        canvas.line(b, t, color=_COL_BASE, width=2.0)
        canvas.circle(b, 2.5, _COL_BASE)
        canvas.text(
            (t[0] + 6.0, t[1]), f"{obj.height_mm:.0f} mm", color=_COL_BASE, size=12.0
        )
    canvas.save(path)
