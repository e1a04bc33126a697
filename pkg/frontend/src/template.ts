// Face-template diagram: millimeter coordinates with origin at the
// bottom-left and y pointing up, drawn on a canvas whose y points down.

import type { ReferenceFace } from "./api.js";
import { COLORS } from "./draw.js";
import type { Pt } from "./view.js";

export interface TemplateTransform {
  scale: number;
  marginX: number;
  marginY: number;
  canvasH: number;
}

export function fitTemplate(
  canvasW: number,
  canvasH: number,
  widthMm: number,
  heightMm: number,
): TemplateTransform {
  const scale = 0.86 * Math.min(canvasW / widthMm, canvasH / heightMm);
  return {
    scale,
    marginX: (canvasW - widthMm * scale) / 2,
    marginY: (canvasH - heightMm * scale) / 2,
    canvasH,
  };
}

export function mmToCanvas(t: TemplateTransform, p: [number, number]): Pt {
  return {
    x: t.marginX + p[0] * t.scale,
    y: t.canvasH - t.marginY - p[1] * t.scale,
  };
}

export function canvasToMm(t: TemplateTransform, p: Pt): [number, number] {
  return [
    (p.x - t.marginX) / t.scale,
    (t.canvasH - t.marginY - p.y) / t.scale,
  ];
}

export function clampToFace(
  face: ReferenceFace,
  p: [number, number],
): [number, number] {
  return [
    Math.min(face.width_mm, Math.max(0, p[0])),
    Math.min(face.height_mm, Math.max(0, p[1])),
  ];
}

export function drawTemplate(
  ctx: CanvasRenderingContext2D,
  t: TemplateTransform,
  face: ReferenceFace,
  picked: [number, number][],
  pending: [number, number] | null,
): void {
  const canvas = ctx.canvas;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const o = mmToCanvas(t, [0, face.height_mm]);
  ctx.save();
  ctx.fillStyle = "#fbfbf8";
  ctx.strokeStyle = "#444444";
  ctx.lineWidth = 1.5;
  ctx.fillRect(o.x, o.y, face.width_mm * t.scale, face.height_mm * t.scale);
  ctx.strokeRect(o.x, o.y, face.width_mm * t.scale, face.height_mm * t.scale);
  ctx.strokeStyle = COLORS.templateLine;
  ctx.lineWidth = 1;
  for (const pair of face.line_pairs) {
    for (const seg of pair) {
      const p1 = mmToCanvas(t, [seg[0], seg[1]]);
      const p2 = mmToCanvas(t, [seg[2], seg[3]]);
      ctx.beginPath();
      ctx.moveTo(p1.x, p1.y);
      ctx.lineTo(p2.x, p2.y);
      ctx.stroke();
    }
  }
  ctx.font = "11px sans-serif";
  ctx.fillStyle = "#666666";
  ctx.fillText(`${face.face_id} (${face.width_mm} x ${face.height_mm} mm)`, 6, 14);
  picked.forEach((p, i) => {
    const s = mmToCanvas(t, p);
    ctx.fillStyle = COLORS.corr;
    ctx.beginPath();
    ctx.arc(s.x, s.y, 3, 0, Math.PI * 2);
    ctx.fill();
    ctx.fillText(String(i + 1), s.x + 5, s.y - 5);
  });
  if (pending) {
    const s = mmToCanvas(t, pending);
    ctx.strokeStyle = COLORS.pending;
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.arc(s.x, s.y, 5, 0, Math.PI * 2);
    ctx.stroke();
  }
  ctx.restore();
}
