// Application wiring: upload, correspondence picking, calibration,
// click-to-measure. All measurement numbers shown come verbatim from
// service responses; the client only transforms for display.

import {
  ApiClient,
  ApiError,
  CalibrationResult,
  MeasurementResult,
  ReferenceSpec,
} from "./api.js";
import {
  COLORS,
  drawCalibration,
  drawCorrMarkers,
  drawMeasurement,
  drawPendingPoint,
} from "./draw.js";
import { formatHeight, formatShift } from "./format.js";
import { calibrateGate, CorrespondencePicker, MeasurePicker } from "./state.js";
import {
  canvasToMm,
  clampToFace,
  drawTemplate,
  fitTemplate,
  TemplateTransform,
} from "./template.js";
import { fitImage, pan, screenToImage, Transform, zoomAt } from "./view.js";

type Phase = "setup" | "pick" | "calibrated";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

class App {
  api = new ApiClient("");
  phase: Phase = "setup";
  sessionId: string | null = null;
  reference: ReferenceSpec | null = null;
  image: HTMLImageElement | null = null;
  view: Transform = { scale: 1, ox: 0, oy: 0 };
  picker = new CorrespondencePicker();
  measurePicker = new MeasurePicker();
  calibration: CalibrationResult | null = null;
  measurements: MeasurementResult[] = [];
  selectedMeasurement = -1;
  currentFace = "";
  dirtyFaces = new Set<string>();

  photoCanvas = el<HTMLCanvasElement>("photo-canvas");
  templateCanvas = el<HTMLCanvasElement>("template-canvas");
  magnifier = el<HTMLCanvasElement>("magnifier");
  templateTransform: TemplateTransform | null = null;

  private dragging = false;
  private dragMoved = false;
  private dragLast = { x: 0, y: 0 };

  constructor() {
    this.api.onBusyChange = (busy) => {
      document.body.classList.toggle("busy", busy);
      this.syncControls();
    };
    this.bindSetup();
    this.bindCanvas();
    this.bindButtons();
    void this.restoreFromHash();
  }

  // ---- phase / DOM sync ----

  setPhase(phase: Phase): void {
    this.phase = phase;
    el("setup-panel").hidden = phase !== "setup";
    el("work-panel").hidden = phase === "setup";
    el("pick-tools").hidden = phase !== "pick";
    el("measure-tools").hidden = phase !== "calibrated";
    this.syncControls();
    this.render();
  }

  banner(kind: "error" | "warn" | "info" | "none", text = ""): void {
    const box = el("banner");
    box.hidden = kind === "none";
    box.className = `banner ${kind}`;
    box.textContent = text;
  }

  syncControls(): void {
    const busy = this.api.isBusy;
    el<HTMLButtonElement>("start-btn").disabled = busy;
    el<HTMLButtonElement>("submit-corrs").disabled =
      busy || this.phase !== "pick" || this.picker.count(this.currentFace) === 0;
    const gate = this.reference
      ? calibrateGate(this.reference, (fid) => this.submittedCount(fid))
      : { enabled: false, reason: "no reference loaded" };
    const calBtn = el<HTMLButtonElement>("calibrate-btn");
    calBtn.disabled = busy || this.phase !== "pick" || !gate.enabled;
    el("gate-reason").textContent = gate.enabled
      ? "ready to calibrate"
      : gate.reason;
    el<HTMLButtonElement>("repick-btn").disabled = busy || this.phase !== "calibrated";
  }

  submittedCount(faceId: string): number {
    // only rows the server has seen count toward the gate
    return this.dirtyFaces.has(faceId) ? 0 : this.picker.count(faceId);
  }

  // ---- setup phase ----

  bindSetup(): void {
    el<HTMLButtonElement>("start-btn").addEventListener("click", () => {
      void this.startSession();
    });
  }

  async startSession(): Promise<void> {
    const input = el<HTMLInputElement>("file-input");
    const refName = el<HTMLInputElement>("ref-input").value.trim() || "box_10cm";
    const file = input.files?.[0];
    if (!file) {
      this.banner("error", "choose a photo first");
      return;
    }
    try {
      const { id } = await this.api.createSession(file, refName);
      this.sessionId = id;
      window.location.hash = `s=${id}`;
      this.reference = await this.api.getReference(refName);
      await this.loadImageBlob(file);
      this.initFaces();
      this.banner("none");
      this.setPhase("pick");
    } catch (err) {
      this.showError(err);
    }
  }

  async restoreFromHash(): Promise<void> {
    const match = window.location.hash.match(/s=([0-9a-f]+)/);
    if (!match) {
      this.setPhase("setup");
      return;
    }
    try {
      const doc = await this.api.getSession(match[1]);
      this.sessionId = doc.id;
      this.reference = await this.api.getReference(doc.reference);
      await this.loadImageUrl(this.api.sessionImageUrl(doc.id));
      this.initFaces();
      for (const [fid, rows] of Object.entries(doc.correspondences)) {
        this.picker.replaceAll(
          fid,
          rows.map((r) => ({
            template: [r[0], r[1]] as [number, number],
            image: [r[2], r[3]] as [number, number],
          })),
        );
      }
      this.calibration = doc.calibration;
      this.measurements = doc.measurements;
      this.setPhase(this.calibration ? "calibrated" : "pick");
    } catch (err) {
      this.showError(err);
      this.setPhase("setup");
    }
  }

  loadImageBlob(blob: Blob): Promise<void> {
    return this.loadImageUrl(URL.createObjectURL(blob));
  }

  loadImageUrl(url: string): Promise<void> {
    return new Promise((resolve, reject) => {
      const img = new Image();
      img.onload = () => {
        this.image = img;
        this.resetView();
        resolve();
      };
      img.onerror = () => reject(new Error("could not load the session image"));
      img.src = url;
    });
  }

  initFaces(): void {
    if (!this.reference) {
      return;
    }
    const tabs = el("face-tabs");
    tabs.innerHTML = "";
    for (const face of this.reference.faces) {
      const btn = document.createElement("button");
      btn.textContent = `${face.face_id} (${face.role === "ground_plane_face" ? "ground" : "height"})`;
      btn.dataset.face = face.face_id;
      btn.addEventListener("click", () => {
        this.currentFace = face.face_id;
        this.picker.cancelPending();
        this.render();
        this.syncControls();
      });
      tabs.appendChild(btn);
    }
    this.currentFace = this.reference.faces[0].face_id;
    el("zr-label").textContent =
      `${this.reference.name}, reference height ${this.reference.reference_height_mm} mm`;
  }

  // ---- canvas interaction ----

  bindCanvas(): void {
    const canvas = this.photoCanvas;
    canvas.addEventListener("pointerdown", (ev) => {
      this.dragging = true;
      this.dragMoved = false;
      this.dragLast = { x: ev.offsetX, y: ev.offsetY };
      canvas.setPointerCapture(ev.pointerId);
    });
    canvas.addEventListener("pointermove", (ev) => {
      this.updateMagnifier(ev.offsetX, ev.offsetY);
      if (!this.dragging) {
        return;
      }
      const dx = ev.offsetX - this.dragLast.x;
      const dy = ev.offsetY - this.dragLast.y;
      if (Math.abs(dx) + Math.abs(dy) > 3) {
        this.dragMoved = true;
      }
      if (this.dragMoved) {
        this.view = pan(this.view, dx, dy);
        this.dragLast = { x: ev.offsetX, y: ev.offsetY };
        this.render();
      }
    });
    canvas.addEventListener("pointerup", (ev) => {
      canvas.releasePointerCapture(ev.pointerId);
      const wasClick = !this.dragMoved;
      this.dragging = false;
      if (wasClick && !this.api.isBusy) {
        this.handlePhotoClick(ev.offsetX, ev.offsetY);
      }
    });
    canvas.addEventListener("pointerleave", () => {
      this.magnifier.hidden = true;
    });
    canvas.addEventListener(
      "wheel",
      (ev) => {
        ev.preventDefault();
        const factor = ev.deltaY < 0 ? 1.15 : 1 / 1.15;
        this.view = zoomAt(this.view, factor, { x: ev.offsetX, y: ev.offsetY });
        this.render();
      },
      { passive: false },
    );

    this.templateCanvas.addEventListener("click", (ev) => {
      if (this.phase !== "pick" || !this.reference || !this.templateTransform) {
        return;
      }
      const face = this.reference.faces.find((f) => f.face_id === this.currentFace);
      if (!face) {
        return;
      }
      const mm = clampToFace(
        face,
        canvasToMm(this.templateTransform, { x: ev.offsetX, y: ev.offsetY }),
      );
      this.picker.clickTemplate(mm);
      el("pick-hint").textContent =
        "template point set, now click the matching photo point";
      this.render();
    });
  }

  handlePhotoClick(sx: number, sy: number): void {
    const img = screenToImage(this.view, { x: sx, y: sy });
    const point: [number, number] = [img.x, img.y];
    if (this.phase === "pick") {
      if (this.picker.clickImage(this.currentFace, point)) {
        this.dirtyFaces.add(this.currentFace);
        el("pick-hint").textContent =
          "pair added, click the next template point";
        this.render();
        this.syncControls();
      } else {
        el("pick-hint").textContent = "click a template point first";
      }
    } else if (this.phase === "calibrated") {
      const pair = this.measurePicker.click(point);
      if (pair === null) {
        el("measure-hint").textContent = "base set, now click the top";
        this.render();
      } else {
        void this.runMeasurement(pair[0], pair[1]);
      }
    }
  }

  async runMeasurement(
    b: [number, number],
    t: [number, number],
  ): Promise<void> {
    if (!this.sessionId) {
      return;
    }
    try {
      const m = await this.api.measure(this.sessionId, b, t);
      this.measurements.push(m);
      this.selectedMeasurement = this.measurements.length - 1;
      el("measure-hint").textContent = "click the next base point";
      if (m.low_confidence) {
        this.banner(
          "warn",
          "low confidence: the base point is close to the vanishing line",
        );
      } else {
        this.banner("none");
      }
      this.renderHistory();
      this.render();
    } catch (err) {
      this.measurePicker.cancel();
      this.showError(err);
      this.render();
    }
  }

  // ---- buttons ----

  bindButtons(): void {
    el<HTMLButtonElement>("submit-corrs").addEventListener("click", () => {
      void this.submitCorrs();
    });
    el<HTMLButtonElement>("calibrate-btn").addEventListener("click", () => {
      void this.runCalibration();
    });
    el<HTMLButtonElement>("repick-btn").addEventListener("click", () => {
      this.setPhase("pick");
    });
    el<HTMLButtonElement>("reset-view-btn").addEventListener("click", () => {
      this.resetView();
      this.render();
    });
  }

  async submitCorrs(): Promise<void> {
    if (!this.sessionId) {
      return;
    }
    const faceId = this.currentFace;
    try {
      await this.api.putCorrespondences(
        this.sessionId,
        faceId,
        this.picker.rowsFor(faceId),
      );
      this.dirtyFaces.delete(faceId);
      // the server dropped the calibration and its measurements too
      this.calibration = null;
      this.measurements = [];
      this.selectedMeasurement = -1;
      this.renderHistory();
      this.banner("info", `face ${faceId}: correspondences submitted`);
      this.syncControls();
    } catch (err) {
      this.showError(err);
    }
  }

  async runCalibration(): Promise<void> {
    if (!this.sessionId) {
      return;
    }
    try {
      this.calibration = await this.api.calibrate(this.sessionId);
      const stats = Object.entries(this.calibration.diagnostics.faces)
        .map(
          ([fid, s]) =>
            `${fid}: ${s.n_inliers}/${s.n_correspondences} inliers, ` +
            `${s.mean_inlier_error_px.toFixed(2)} px`,
        )
        .join("; ");
      this.banner("info", `calibrated (${stats}); click base then top to measure`);
      this.setPhase("calibrated");
    } catch (err) {
      this.showError(err);
    }
  }

  showError(err: unknown): void {
    if (err instanceof ApiError) {
      this.banner("error", `${err.code}: ${err.message}`);
    } else {
      this.banner("error", String(err));
    }
  }

  // ---- rendering ----

  resetView(): void {
    if (this.image) {
      this.view = fitImage(
        this.photoCanvas.width,
        this.photoCanvas.height,
        this.image.naturalWidth,
        this.image.naturalHeight,
      );
    }
  }

  render(): void {
    const ctx = this.photoCanvas.getContext("2d");
    if (!ctx) {
      return;
    }
    ctx.setTransform(1, 0, 0, 1, 0, 0);
    ctx.fillStyle = "#20242a";
    ctx.fillRect(0, 0, this.photoCanvas.width, this.photoCanvas.height);
    if (this.image) {
      ctx.setTransform(this.view.scale, 0, 0, this.view.scale, this.view.ox, this.view.oy);
      ctx.drawImage(this.image, 0, 0);
      ctx.setTransform(1, 0, 0, 1, 0, 0);
    }
    if (this.phase === "pick") {
      drawCorrMarkers(
        ctx,
        this.view,
        this.picker.rowsFor(this.currentFace).map((r) => r.image),
      );
      this.renderTemplate();
      this.renderCorrTable();
    }
    if (this.calibration && this.image) {
      drawCalibration(
        ctx,
        this.view,
        this.calibration,
        this.image.naturalWidth,
        this.image.naturalHeight,
      );
    }
    if (this.phase === "calibrated") {
      this.measurements.forEach((m, i) => {
        drawMeasurement(ctx, this.view, m, i === this.selectedMeasurement);
      });
      const base = this.measurePicker.pendingBase;
      if (base) {
        drawPendingPoint(ctx, this.view, base);
      }
    }
  }

  renderTemplate(): void {
    const ctx = this.templateCanvas.getContext("2d");
    const face = this.reference?.faces.find((f) => f.face_id === this.currentFace);
    if (!ctx || !face) {
      return;
    }
    this.templateTransform = fitTemplate(
      this.templateCanvas.width,
      this.templateCanvas.height,
      face.width_mm,
      face.height_mm,
    );
    drawTemplate(
      ctx,
      this.templateTransform,
      face,
      this.picker.rowsFor(face.face_id).map((r) => r.template),
      this.picker.pending,
    );
    for (const btn of el("face-tabs").querySelectorAll("button")) {
      btn.classList.toggle("active", btn.dataset.face === this.currentFace);
    }
  }

  renderCorrTable(): void {
    const tbody = el("corr-rows");
    tbody.innerHTML = "";
    this.picker.rowsFor(this.currentFace).forEach((row, i) => {
      const tr = document.createElement("tr");
      tr.innerHTML =
        `<td>${i + 1}</td>` +
        `<td>${row.template[0].toFixed(1)}, ${row.template[1].toFixed(1)}</td>` +
        `<td>${row.image[0].toFixed(1)}, ${row.image[1].toFixed(1)}</td>`;
      const td = document.createElement("td");
      const del = document.createElement("button");
      del.textContent = "x";
      del.title = "delete this correspondence";
      del.addEventListener("click", () => {
        this.picker.deleteRow(this.currentFace, i);
        this.dirtyFaces.add(this.currentFace);
        this.render();
        this.syncControls();
      });
      td.appendChild(del);
      tr.appendChild(td);
      tbody.appendChild(tr);
    });
    el("corr-count").textContent = String(this.picker.count(this.currentFace));
  }

  renderHistory(): void {
    const list = el("history");
    list.innerHTML = "";
    this.measurements.forEach((m, i) => {
      const item = document.createElement("li");
      const parts = [formatHeight(m.height_mm)];
      if (m.alignment_shift_px > 0.05) {
        parts.push(formatShift(m.alignment_shift_px));
      }
      if (m.low_confidence) {
        parts.push("low confidence");
      }
      item.textContent = `#${i + 1}: ${parts.join(", ")}`;
      item.className = i === this.selectedMeasurement ? "selected" : "";
      item.addEventListener("click", () => {
        this.selectedMeasurement = i;
        this.renderHistory();
        this.render();
      });
      list.appendChild(item);
    });
  }

  updateMagnifier(sx: number, sy: number): void {
    if (!this.image) {
      return;
    }
    const mag = this.magnifier;
    mag.hidden = false;
    mag.style.left = `${Math.min(sx + 24, this.photoCanvas.width - 130)}px`;
    mag.style.top = `${Math.max(sy - 144, 4)}px`;
    const ctx = mag.getContext("2d");
    if (!ctx) {
      return;
    }
    const zoom = 3;
    const half = mag.width / 2;
    const img = screenToImage(this.view, { x: sx, y: sy });
    ctx.setTransform(1, 0, 0, 1, 0, 0);
    ctx.fillStyle = "#20242a";
    ctx.fillRect(0, 0, mag.width, mag.height);
    const s = this.view.scale * zoom;
    ctx.setTransform(s, 0, 0, s, half - img.x * s, half - img.y * s);
    ctx.drawImage(this.image, 0, 0);
    ctx.setTransform(1, 0, 0, 1, 0, 0);
    ctx.strokeStyle = COLORS.pending;
    ctx.lineWidth = 1;
    ctx.beginPath();
    ctx.moveTo(half, 6);
    ctx.lineTo(half, mag.height - 6);
    ctx.moveTo(6, half);
    ctx.lineTo(mag.width - 6, half);
    ctx.stroke();
    ctx.strokeStyle = "#ffffff";
    ctx.strokeRect(0.5, 0.5, mag.width - 1, mag.height - 1);
  }
}

declare global {
  interface Window {
    svmeasureApp?: App;
  }
}

window.addEventListener("DOMContentLoaded", () => {
  window.svmeasureApp = new App();
});
