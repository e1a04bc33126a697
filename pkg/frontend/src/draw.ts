// Canvas rendering of service-provided geometry. The client never
// derives measurement numbers; it only clips and scales entities the
// service returned so they can be seen.

import type { CalibrationResult, MeasurementResult } from "./api.js";
import { formatHeight, formatShift } from "./format.js";
import { imageToScreen, Transform, Pt } from "./view.js";

export const COLORS = {
  horizon: "#d94801",
  templateLine: "#7a0177",
  reference: "#238b45",
  snap: "#2171b5",
  raw: "#999999",
  base: "#238b45",
  pending: "#e31a1c",
  corr: "#c51b8a",
};

/** Segment of a homogeneous line inside a w x h pixel rectangle. */
export function clipLineToRect(
  line: number[],
  w: number,
  h: number,
): [Pt, Pt] | null {
  const [a, b, c] = line;
  const pts: Pt[] = [];
  const push = (x: number, y: number) => {
    if (x >= -1e-6 && x <= w + 1e-6 && y >= -1e-6 && y <= h + 1e-6) {
      if (!pts.some((p) => Math.abs(p.x - x) + Math.abs(p.y - y) < 1e-6)) {
        pts.push({ x, y });
      }
    }
  };
  if (Math.abs(b) > 1e-12) {
    push(0, -c / b);
    push(w, -(a * w + c) / b);
  }
  if (Math.abs(a) > 1e-12) {
    push(-c / a, 0);
    push(-(b * h + c) / a, h);
  }
  if (pts.length < 2) {
    return null;
  }
  return [pts[0], pts[1]];
}

function dehomogenize(v: number[]): Pt | null {
  if (Math.abs(v[2]) < 1e-9 * Math.hypot(v[0], v[1], v[2])) {
    return null;
  }
  return { x: v[0] / v[2], y: v[1] / v[2] };
}

function line(
  ctx: CanvasRenderingContext2D,
  p: Pt,
  q: Pt,
  color: string,
  width = 1.5,
  dash: number[] = [],
): void {
  ctx.save();
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.setLineDash(dash);
  ctx.beginPath();
  ctx.moveTo(p.x, p.y);
  ctx.lineTo(q.x, q.y);
  ctx.stroke();
  ctx.restore();
}

function dot(
  ctx: CanvasRenderingContext2D,
  p: Pt,
  color: string,
  radius = 4,
  fill = true,
): void {
  ctx.save();
  ctx.strokeStyle = color;
  ctx.fillStyle = color;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  ctx.arc(p.x, p.y, radius, 0, Math.PI * 2);
  if (fill) {
    ctx.fill();
  } else {
    ctx.stroke();
  }
  ctx.restore();
}

function crossMarker(
  ctx: CanvasRenderingContext2D,
  p: Pt,
  color: string,
  size = 5,
): void {
  line(ctx, { x: p.x - size, y: p.y - size }, { x: p.x + size, y: p.y + size }, color);
  line(ctx, { x: p.x - size, y: p.y + size }, { x: p.x + size, y: p.y - size }, color);
}

function label(
  ctx: CanvasRenderingContext2D,
  p: Pt,
  text: string,
  color: string,
): void {
  ctx.save();
  ctx.font = "13px sans-serif";
  ctx.fillStyle = "#ffffff";
  const metrics = ctx.measureText(text);
  ctx.fillRect(p.x + 6, p.y - 20, metrics.width + 8, 18);
  ctx.fillStyle = color;
  ctx.fillText(text, p.x + 10, p.y - 7);
  ctx.restore();
}

/** Vanishing line, imaged template line pairs, reference segment. */
export function drawCalibration(
  ctx: CanvasRenderingContext2D,
  t: Transform,
  cal: CalibrationResult,
  imageW: number,
  imageH: number,
): void {
  const lines = cal.diagnostics.image_lines ?? {};
  for (const pairs of Object.values(lines)) {
    for (const pair of pairs) {
      for (const hline of pair) {
        const seg = clipLineToRect(hline, imageW, imageH);
        if (seg) {
          line(
            ctx,
            imageToScreen(t, seg[0]),
            imageToScreen(t, seg[1]),
            COLORS.templateLine,
            1,
            [2, 4],
          );
        }
      }
    }
  }
  const horizon = clipLineToRect(cal.l, imageW, imageH);
  if (horizon) {
    line(
      ctx,
      imageToScreen(t, horizon[0]),
      imageToScreen(t, horizon[1]),
      COLORS.horizon,
      2,
      [8, 5],
    );
  }
  const bR = dehomogenize(cal.b_r);
  const tR = dehomogenize(cal.t_r);
  if (bR && tR) {
    line(ctx, imageToScreen(t, bR), imageToScreen(t, tR), COLORS.reference, 2);
    dot(ctx, imageToScreen(t, bR), COLORS.reference, 4, false);
    dot(ctx, imageToScreen(t, tR), COLORS.reference, 4, false);
  }
}

/** Raw pick, snap line toward the vanishing point, aligned result. */
export function drawMeasurement(
  ctx: CanvasRenderingContext2D,
  t: Transform,
  m: MeasurementResult,
  highlight: boolean,
): void {
  const b = dehomogenize(m.b_x);
  const raw = dehomogenize(m.t_x_raw);
  const aligned = dehomogenize(m.t_x_aligned);
  if (!b || !aligned) {
    return;
  }
  const bS = imageToScreen(t, b);
  const alignedS = imageToScreen(t, aligned);
  // extend the snap direction a little past the aligned top
  const dx = alignedS.x - bS.x;
  const dy = alignedS.y - bS.y;
  const n = Math.hypot(dx, dy) || 1;
  const ext = {
    x: alignedS.x + (35 * dx) / n,
    y: alignedS.y + (35 * dy) / n,
  };
  line(ctx, bS, ext, COLORS.snap, 1, [5, 4]);
  line(ctx, bS, alignedS, COLORS.snap, highlight ? 3 : 2);
  if (raw && m.alignment_shift_px > 0.05) {
    const rawS = imageToScreen(t, raw);
    crossMarker(ctx, rawS, COLORS.raw);
    line(ctx, rawS, alignedS, COLORS.raw, 1, [2, 3]);
  }
  dot(ctx, bS, COLORS.base);
  dot(ctx, alignedS, COLORS.snap);
  if (highlight) {
    const text =
      m.alignment_shift_px > 0.05
        ? `${formatHeight(m.height_mm)}, ${formatShift(m.alignment_shift_px)}`
        : formatHeight(m.height_mm);
    label(ctx, alignedS, text, COLORS.snap);
  }
}

export function drawPendingPoint(
  ctx: CanvasRenderingContext2D,
  t: Transform,
  point: [number, number],
): void {
  dot(ctx, imageToScreen(t, { x: point[0], y: point[1] }), COLORS.pending, 5, false);
}

export function drawCorrMarkers(
  ctx: CanvasRenderingContext2D,
  t: Transform,
  images: [number, number][],
): void {
  images.forEach((p, i) => {
    const s = imageToScreen(t, { x: p[0], y: p[1] });
    dot(ctx, s, COLORS.corr, 3);
    ctx.save();
    ctx.font = "11px sans-serif";
    ctx.fillStyle = COLORS.corr;
    ctx.fillText(String(i + 1), s.x + 5, s.y - 5);
    ctx.restore();
  });
}
