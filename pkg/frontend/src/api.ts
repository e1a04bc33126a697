// Typed client for the measurement service. At most one request per
// session is in flight at a time; callers subscribe to busy-state
// changes to disable inputs while waiting.

export interface ReferenceFace {
  face_id: string;
  role: "ground_plane_face" | "reference_direction_face";
  width_mm: number;
  height_mm: number;
  line_pairs: number[][][];
}

export interface ReferenceSpec {
  name: string;
  reference_height_mm: number;
  base_anchor: [number, number];
  top_anchor: [number, number];
  faces: ReferenceFace[];
}

export interface CorrRow {
  template: [number, number];
  image: [number, number];
}

export interface FaceStats {
  n_correspondences: number;
  n_inliers: number;
  mean_inlier_error_px: number;
  iterations_run: number;
}

export interface CalibrationResult {
  l: number[];
  v: number[];
  b_r: number[];
  t_r: number[];
  alpha: number;
  diagnostics: {
    faces: Record<string, FaceStats>;
    image_lines?: Record<string, number[][][]>;
    [key: string]: unknown;
  };
}

export interface MeasurementResult {
  b_x: number[];
  t_x_raw: number[];
  t_x_aligned: number[];
  height_mm: number;
  alignment_shift_px: number;
  low_confidence: boolean;
}

export interface SessionDoc {
  id: string;
  reference: string;
  image: { format: string; width: number; height: number; size_bytes: number };
  correspondences: Record<string, number[][]>;
  calibration: CalibrationResult | null;
  measurements: MeasurementResult[];
}

export class ApiError extends Error {
  constructor(
    public code: string,
    message: string,
    public status: number,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private busy = false;
  onBusyChange: ((busy: boolean) => void) | null = null;

  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  get isBusy(): boolean {
    return this.busy;
  }

  private setBusy(value: boolean): void {
    this.busy = value;
    this.onBusyChange?.(value);
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    if (this.busy) {
      throw new ApiError("ClientBusy", "another request is still in flight", 0);
    }
    this.setBusy(true);
    try {
      const response = await this.fetchFn(this.baseUrl + path, init);
      const text = await response.text();
      const body = text ? JSON.parse(text) : null;
      if (!response.ok) {
        const err = body?.error ?? { code: `HTTP${response.status}`, message: text };
        throw new ApiError(err.code, err.message, response.status);
      }
      return body as T;
    } finally {
      this.setBusy(false);
    }
  }

  createSession(image: Blob, reference: string): Promise<{ id: string }> {
    const form = new FormData();
    form.append("image", image);
    form.append("reference", reference);
    return this.request("/sessions", { method: "POST", body: form });
  }

  getSession(sessionId: string): Promise<SessionDoc> {
    return this.request(`/sessions/${sessionId}`);
  }

  getReference(name: string): Promise<ReferenceSpec> {
    return this.request(`/references/${name}`);
  }

  sessionImageUrl(sessionId: string): string {
    return `${this.baseUrl}/sessions/${sessionId}/image`;
  }

  putCorrespondences(
    sessionId: string,
    faceId: string,
    rows: CorrRow[],
  ): Promise<{ count: number }> {
    return this.request(
      `/sessions/${sessionId}/faces/${faceId}/correspondences`,
      {
        method: "PUT",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ correspondences: rows }),
      },
    );
  }

  calibrate(sessionId: string, seed = 0): Promise<CalibrationResult> {
    return this.request(`/sessions/${sessionId}/calibrate`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ seed }),
    });
  }

  measure(
    sessionId: string,
    b: [number, number],
    t: [number, number],
  ): Promise<MeasurementResult> {
    return this.request(`/sessions/${sessionId}/measurements`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ b, t }),
    });
  }
}
