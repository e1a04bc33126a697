import { describe, expect, it } from "vitest";

import type { ReferenceSpec } from "../src/api.js";
import { calibrateGate, CorrespondencePicker, MeasurePicker } from "../src/state.js";

const BOX: ReferenceSpec = {
  name: "box_10cm",
  reference_height_mm: 100,
  base_anchor: [50, 0],
  top_anchor: [50, 100],
  faces: [
    {
      face_id: "top",
      role: "ground_plane_face",
      width_mm: 100,
      height_mm: 100,
      line_pairs: [],
    },
    {
      face_id: "front",
      role: "reference_direction_face",
      width_mm: 100,
      height_mm: 100,
      line_pairs: [],
    },
  ],
};

describe("CorrespondencePicker", () => {
  it("eight alternating clicks make four rows", () => {
    const picker = new CorrespondencePicker();
    for (let i = 0; i < 4; i++) {
      picker.clickTemplate([i * 10, 0]);
      expect(picker.clickImage("top", [i * 50, 100])).toBe(true);
    }
    expect(picker.count("top")).toBe(4);
    expect(picker.rowsFor("top")[2]).toEqual({
      template: [20, 0],
      image: [100, 100],
    });
    expect(picker.pending).toBeNull();
  });

  it("a photo click without a pending template point is ignored", () => {
    const picker = new CorrespondencePicker();
    expect(picker.clickImage("top", [1, 2])).toBe(false);
    expect(picker.count("top")).toBe(0);
  });

  it("a second template click replaces the pending point", () => {
    const picker = new CorrespondencePicker();
    picker.clickTemplate([1, 1]);
    picker.clickTemplate([9, 9]);
    picker.clickImage("front", [5, 5]);
    expect(picker.rowsFor("front")).toEqual([
      { template: [9, 9], image: [5, 5] },
    ]);
  });

  it("rows are deletable", () => {
    const picker = new CorrespondencePicker();
    for (let i = 0; i < 3; i++) {
      picker.clickTemplate([i, i]);
      picker.clickImage("top", [i, i]);
    }
    picker.deleteRow("top", 1);
    expect(picker.rowsFor("top").map((r) => r.template[0])).toEqual([0, 2]);
  });
});

describe("calibrateGate", () => {
  const countsFrom = (m: Record<string, number>) => (fid: string) => m[fid] ?? 0;

  it("disabled with a reason when a face is short of points", () => {
    const gate = calibrateGate(BOX, countsFrom({ top: 4, front: 3 }));
    expect(gate.enabled).toBe(false);
    expect(gate.reason).toContain("front");
    expect(gate.reason).toContain("3");
  });

  it("disabled when only the reference face is ready", () => {
    const gate = calibrateGate(BOX, countsFrom({ front: 10 }));
    expect(gate.enabled).toBe(false);
    expect(gate.reason).toContain("ground");
  });

  it("enabled once both required faces have four pairs", () => {
    const gate = calibrateGate(BOX, countsFrom({ top: 4, front: 4 }));
    expect(gate.enabled).toBe(true);
    expect(gate.reason).toBe("");
  });
});

describe("MeasurePicker", () => {
  it("pairs base then top", () => {
    const picker = new MeasurePicker();
    expect(picker.click([10, 20])).toBeNull();
    expect(picker.pendingBase).toEqual([10, 20]);
    expect(picker.click([11, 4])).toEqual([
      [10, 20],
      [11, 4],
    ]);
    expect(picker.pendingBase).toBeNull();
  });

  it("cancel clears the pending base", () => {
    const picker = new MeasurePicker();
    picker.click([1, 1]);
    picker.cancel();
    expect(picker.pendingBase).toBeNull();
    expect(picker.click([2, 2])).toBeNull();
  });
});
