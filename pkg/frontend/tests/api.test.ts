import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, MeasurementResult } from "../src/api.js";
import { formatHeight } from "../src/format.js";

type Recorded = { url: string; init?: RequestInit };

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

function recordingClient(responses: Response[]): { client: ApiClient; calls: Recorded[] } {
  const calls: Recorded[] = [];
  const client = new ApiClient("", async (url, init) => {
    calls.push({ url, init });
    const next = responses.shift();
    if (!next) {
      throw new Error("no scripted response left");
    }
    return next;
  });
  return { client, calls };
}

describe("ApiClient", () => {
  it("sends correspondences in the service wire format", async () => {
    const { client, calls } = recordingClient([jsonResponse({ count: 2 })]);
    await client.putCorrespondences("abc", "top", [
      { template: [0, 0], image: [10.5, 20.25] },
      { template: [100, 0], image: [400, 30] },
    ]);
    expect(calls[0].url).toBe("/sessions/abc/faces/top/correspondences");
    expect(calls[0].init?.method).toBe("PUT");
    expect(JSON.parse(calls[0].init?.body as string)).toEqual({
      correspondences: [
        { template: [0, 0], image: [10.5, 20.25] },
        { template: [100, 0], image: [400, 30] },
      ],
    });
  });

  it("sends base/top picks as two-element arrays", async () => {
    const measurement: MeasurementResult = {
      b_x: [1, 2, 1],
      t_x_raw: [1, 1, 1],
      t_x_aligned: [1, 1, 1],
      height_mm: 170.0,
      alignment_shift_px: 0.0,
      low_confidence: false,
    };
    const { client, calls } = recordingClient([jsonResponse(measurement, 201)]);
    const got = await client.measure("abc", [559.5, 458.25], [556.125, 402.0]);
    expect(JSON.parse(calls[0].init?.body as string)).toEqual({
      b: [559.5, 458.25],
      t: [556.125, 402.0],
    });
    expect(got.height_mm).toBe(170.0);
  });

  it("raises ApiError with the machine code from error bodies", async () => {
    const { client } = recordingClient([
      jsonResponse(
        { error: { code: "ZeroLength", message: "base and aligned top coincide" } },
        422,
      ),
    ]);
    const err = await client.measure("abc", [1, 1], [1, 1]).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.code).toBe("ZeroLength");
    expect(err.status).toBe(422);
  });

  it("allows only one request in flight", async () => {
    let release: (r: Response) => void = () => {};
    const gate = new Promise<Response>((resolve) => {
      release = resolve;
    });
    const client = new ApiClient("", () => gate);
    const first = client.getSession("abc");
    const second = await client.getSession("abc").catch((e) => e);
    expect(second).toBeInstanceOf(ApiError);
    expect((second as ApiError).code).toBe("ClientBusy");
    release(jsonResponse({ id: "abc" }));
    await first;
    expect(client.isBusy).toBe(false);
  });

  it("reports busy-state transitions for input disabling", async () => {
    const states: boolean[] = [];
    const { client } = recordingClient([jsonResponse({ id: "x" })]);
    client.onBusyChange = (b) => states.push(b);
    await client.getSession("x");
    expect(states).toEqual([true, false]);
  });
});

describe("measure round-trip display", () => {
  it("shows the reference height string exactly as derived from the service value", async () => {
    // scripted flow with the service's own wire shapes: the displayed
    // string must be the canonical formatting of the returned float
    const serviceHeight = 100.0;
    const { client } = recordingClient([
      jsonResponse(
        {
          b_x: [500, 700, 1],
          t_x_raw: [500, 400, 1],
          t_x_aligned: [500, 400, 1],
          height_mm: serviceHeight,
          alignment_shift_px: 0.0,
          low_confidence: false,
        },
        201,
      ),
    ]);
    const m = await client.measure("abc", [500, 700], [500, 400]);
    const displayed = formatHeight(m.height_mm);
    expect(displayed).toBe(formatHeight(serviceHeight));
    expect(displayed).toBe("10.00 cm (100.000 mm)");
  });
});
