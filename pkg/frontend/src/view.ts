// Zoom/pan transform between original-image pixels and screen pixels.
// All picks are converted back to image space before they leave the
// client, whatever the current zoom, so the server only ever sees
// original-image coordinates.

export interface Pt {
  x: number;
  y: number;
}

export interface Transform {
  scale: number;
  ox: number;
  oy: number;
}

export const MIN_SCALE = 0.05;
export const MAX_SCALE = 40;

export function imageToScreen(t: Transform, p: Pt): Pt {
  return { x: p.x * t.scale + t.ox, y: p.y * t.scale + t.oy };
}

export function screenToImage(t: Transform, p: Pt): Pt {
  return { x: (p.x - t.ox) / t.scale, y: (p.y - t.oy) / t.scale };
}

/** Transform that letterboxes an image into a canvas with a small margin. */
export function fitImage(
  canvasW: number,
  canvasH: number,
  imageW: number,
  imageH: number,
): Transform {
  const scale = 0.97 * Math.min(canvasW / imageW, canvasH / imageH);
  return {
    scale,
    ox: (canvasW - imageW * scale) / 2,
    oy: (canvasH - imageH * scale) / 2,
  };
}

/** Rescale around a fixed screen point (the cursor). */
export function zoomAt(t: Transform, factor: number, pivot: Pt): Transform {
  const scale = Math.min(MAX_SCALE, Math.max(MIN_SCALE, t.scale * factor));
  const anchor = screenToImage(t, pivot);
  return {
    scale,
    ox: pivot.x - anchor.x * scale,
    oy: pivot.y - anchor.y * scale,
  };
}

export function pan(t: Transform, dx: number, dy: number): Transform {
  return { scale: t.scale, ox: t.ox + dx, oy: t.oy + dy };
}
