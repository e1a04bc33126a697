// Integration: the real client module against the real measurement
// service over HTTP. Covers the browser round trip end to end except
// for DOM events: upload, grid correspondences, calibrate, pick the
// reference's own base/top, and check the displayed string.
//
// Skipped when the service CLI is not on PATH (frontend-only checkout).

import { execFileSync, spawn, ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, CorrRow } from "../src/api.js";
import { formatHeight } from "../src/format.js";

const PNG_1X1 = Buffer.from(
  "iVBORw0KGgoAAAANSUhEUgAAAAEAAAABCAYAAAAfFcSJAAAADUlEQVR42mP8z8BQDwAEhQGAhKmMIQAAAABJRU5ErkJggg==",
  "base64",
);

function serviceAvailable(): boolean {
  try {
    execFileSync("svmeasure", ["--help"], { stdio: "ignore" });
    return true;
  } catch {
    return false;
  }
}

function parseCsv(path: string): CorrRow[] {
  return readFileSync(path, "utf-8")
    .split("\n")
    .slice(1)
    .filter((line) => line.trim().length > 0)
    .map((line) => {
      const [tx, ty, ix, iy] = line.split(",").map(Number);
      return { template: [tx, ty], image: [ix, iy] } as CorrRow;
    });
}

describe.skipIf(!serviceAvailable())("real service round trip", () => {
  let server: ChildProcess;
  let baseUrl = "";
  let fixtureDir = "";

  beforeAll(async () => {
    fixtureDir = mkdtempSync(join(tmpdir(), "svm-ui-"));
    execFileSync("svmeasure", ["simulate", "--out", join(fixtureDir, "fx"), "--seed", "33"]);
    server = spawn(
      "svmeasure",
      ["serve", "--port", "0", "--data-dir", join(fixtureDir, "data")],
      { stdio: ["ignore", "pipe", "inherit"] },
    );
    baseUrl = await new Promise<string>((resolve, reject) => {
      const timer = setTimeout(() => reject(new Error("server start timeout")), 15000);
      server.stdout!.on("data", (chunk: Buffer) => {
        const match = chunk.toString().match(/listening on (http:\/\/[\d.]+:\d+)/);
        if (match) {
          clearTimeout(timer);
          resolve(match[1]);
        }
      });
    });
  }, 30000);

  afterAll(() => {
    server?.kill("SIGINT");
  });

  it("displays the reference height string-exactly after the full flow", async () => {
    const api = new ApiClient(baseUrl);
    const truth = JSON.parse(readFileSync(join(fixtureDir, "fx", "truth.json"), "utf-8"));

    const { id } = await api.createSession(new Blob([PNG_1X1]), "box_10cm");
    expect(id).toMatch(/^[0-9a-f]+$/);

    for (const fid of ["top", "front"]) {
      const rows = parseCsv(join(fixtureDir, "fx", `corrs_${fid}.csv`));
      expect(rows.length).toBe(25);
      const { count } = await api.putCorrespondences(id, fid, rows);
      expect(count).toBe(25);
    }

    const cal = await api.calibrate(id);
    expect(cal.alpha).toBeGreaterThan(0);
    expect(cal.diagnostics.image_lines).toBeDefined();

    // the reference's own imaged base/top must read back as 100 mm
    const bR = [truth.b_r[0] / truth.b_r[2], truth.b_r[1] / truth.b_r[2]];
    const tR = [truth.t_r[0] / truth.t_r[2], truth.t_r[1] / truth.t_r[2]];
    const m = await api.measure(id, bR as [number, number], tR as [number, number]);
    expect(formatHeight(m.height_mm)).toBe(formatHeight(100.0));
    expect(formatHeight(m.height_mm)).toBe("10.00 cm (100.000 mm)");
  }, 30000);

  it("visibly snaps an off-direction top pick", async () => {
    const api = new ApiClient(baseUrl);
    const truth = JSON.parse(readFileSync(join(fixtureDir, "fx", "truth.json"), "utf-8"));
    const { id } = await api.createSession(new Blob([PNG_1X1]), "box_10cm");
    for (const fid of ["top", "front"]) {
      await api.putCorrespondences(id, fid, parseCsv(join(fixtureDir, "fx", `corrs_${fid}.csv`)));
    }
    await api.calibrate(id);
    const obj = truth.objects[0];
    const m = await api.measure(id, obj.base as [number, number], [
      obj.top[0] + 20.0,
      obj.top[1],
    ]);
    expect(m.alignment_shift_px).toBeGreaterThan(15);
    // aligned top differs from the raw pick: the UI draws the snap
    expect(m.t_x_aligned[0] / m.t_x_aligned[2]).not.toBeCloseTo(
      m.t_x_raw[0] / m.t_x_raw[2],
      1,
    );
  }, 30000);
});
