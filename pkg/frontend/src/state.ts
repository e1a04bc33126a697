// Pick-flow state, kept free of DOM so it is directly testable.
// Correspondences are created by alternating clicks: one on the face
// template diagram, then one on the photo.

import type { CorrRow, ReferenceFace, ReferenceSpec } from "./api.js";

export class CorrespondencePicker {
  private rows = new Map<string, CorrRow[]>();
  private pendingTemplate: [number, number] | null = null;

  /** Face ids that received at least one row. */
  faceIds(): string[] {
    return [...this.rows.keys()];
  }

  rowsFor(faceId: string): CorrRow[] {
    return this.rows.get(faceId) ?? [];
  }

  get pending(): [number, number] | null {
    return this.pendingTemplate;
  }

  /** A template click opens (or replaces) the pending half of a pair. */
  clickTemplate(point: [number, number]): void {
    this.pendingTemplate = point;
  }

  /** A photo click completes the pending pair; ignored when none is open. */
  clickImage(faceId: string, point: [number, number]): boolean {
    if (this.pendingTemplate === null) {
      return false;
    }
    const list = this.rows.get(faceId) ?? [];
    list.push({ template: this.pendingTemplate, image: point });
    this.rows.set(faceId, list);
    this.pendingTemplate = null;
    return true;
  }

  cancelPending(): void {
    this.pendingTemplate = null;
  }

  deleteRow(faceId: string, index: number): void {
    const list = this.rows.get(faceId);
    if (list && index >= 0 && index < list.length) {
      list.splice(index, 1);
    }
  }

  replaceAll(faceId: string, rows: CorrRow[]): void {
    this.rows.set(faceId, [...rows]);
  }

  count(faceId: string): number {
    return this.rowsFor(faceId).length;
  }
}

export interface Gate {
  enabled: boolean;
  reason: string;
}

export function anchorFace(ref: ReferenceSpec): ReferenceFace {
  const face = ref.faces.find((f) => f.role === "reference_direction_face");
  if (!face) {
    throw new Error(`reference ${ref.name} has no reference_direction_face`);
  }
  return face;
}

/**
 * Calibration needs at least 4 correspondences on one ground face and
 * 4 on the anchor face; anything less keeps the button disabled with a
 * human-readable reason.
 */
export function calibrateGate(
  ref: ReferenceSpec,
  counts: (faceId: string) => number,
): Gate {
  const minPerFace = 4;
  const ground = ref.faces.filter((f) => f.role === "ground_plane_face");
  const groundReady = ground.some((f) => counts(f.face_id) >= minPerFace);
  const anchor = anchorFace(ref);
  const anchorReady = counts(anchor.face_id) >= minPerFace;
  if (groundReady && anchorReady) {
    return { enabled: true, reason: "" };
  }
  const missing: string[] = [];
  if (!groundReady) {
    const best = ground
      .map((f) => `${f.face_id}: ${counts(f.face_id)}`)
      .join(", ");
    missing.push(`a ground face needs at least ${minPerFace} (${best})`);
  }
  if (!anchorReady) {
    missing.push(
      `face ${anchor.face_id} needs at least ${minPerFace} ` +
        `(${counts(anchor.face_id)} so far)`,
    );
  }
  return { enabled: false, reason: missing.join("; ") };
}

/** Base/top two-click flow for the measuring phase. */
export class MeasurePicker {
  private base: [number, number] | null = null;

  get pendingBase(): [number, number] | null {
    return this.base;
  }

  /** Returns a (base, top) pair when the click completes one. */
  click(point: [number, number]): [[number, number], [number, number]] | null {
    if (this.base === null) {
      this.base = point;
      return null;
    }
    const pair: [[number, number], [number, number]] = [this.base, point];
    this.base = null;
    return pair;
  }

  cancel(): void {
    this.base = null;
  }
}
