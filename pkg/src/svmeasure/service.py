"""HTTP measurement service.

One JSON document per session in the data directory, written with the
temp-then-rename discipline so a crash between requests never leaves a
torn file. Requests for one session are serialized by a per-session
lock; different sessions proceed in parallel (endpoints are sync, so
each request runs on its own worker thread).

The server stores uploaded image bytes verbatim and only reads the
header to validate the format and extract pixel dimensions; all
geometry runs on correspondences and clicks.
"""
from __future__ import annotations

import io
import json
import os
import tempfile
import threading
import uuid
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, File, Form, Request, Response, UploadFile
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from PIL import Image, UnidentifiedImageError
from pydantic import BaseModel, Field

from .errors import (
    CalibrationRequired,
    MeasureError,
    ParseError,
    SessionNotFound,
    UndecodableImage,
    UnknownReference,
    ValidationError,
)
from .geometry import Homog3
from .homography import Correspondence, RansacConfig
from .metrology import (
    calibrate,
    calibration_from_dict,
    calibration_to_dict,
    measure_height,
    measurement_to_dict,
)
from .reference import ReferenceObject, bundled_reference, load_reference

DATA_DIR_ENV = "SVMEASURE_DATA_DIR"
UI_DIR_ENV = "SVMEASURE_UI_DIR"

_STATUS_BY_CODE = {
    "SessionNotFound": 404,
    "UnknownReference": 404,
    "UndecodableImage": 400,
    "ParseError": 400,
    "ValidationError": 400,
    "CalibrationRequired": 409,
}
_DEFAULT_STATUS = 422  # geometry and consensus failures


class CorrespondenceItem(BaseModel):
    template: tuple[float, float]
    image: tuple[float, float]


class CorrespondencesBody(BaseModel):
    correspondences: list[CorrespondenceItem]


class CalibrateBody(BaseModel):
    inlier_threshold: float = 3.0
    confidence: float = 0.999
    max_iterations: int = 2000
    min_inliers: int = 10
    seed: int = 0

    def to_config(self) -> RansacConfig:
        return RansacConfig(
            inlier_threshold=self.inlier_threshold,
            confidence=self.confidence,
            max_iterations=self.max_iterations,
            min_inliers=self.min_inliers,
            seed=self.seed,
        )


class MeasureBody(BaseModel):
    b: tuple[float, float] = Field(description="base pick, image pixels")
    t: tuple[float, float] = Field(description="top pick, image pixels")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _atomic_write(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _validate_image(data: bytes) -> dict:
    try:
        img = Image.open(io.BytesIO(data))
    except UnidentifiedImageError as exc:
        raise UndecodableImage("image is not a decodable PNG or JPEG") from exc
    if img.format not in ("PNG", "JPEG"):
        raise UndecodableImage(f"unsupported image format {img.format!r}")
    return {
        "format": img.format,
        "width": img.size[0],
        "height": img.size[1],
        "size_bytes": len(data),
    }


class SessionStore:
    """Disk-backed sessions with per-session exclusive access."""

    def __init__(self, data_dir: Path):
        self.data_dir = Path(data_dir)
        self.sessions_dir = self.data_dir / "sessions"
        self.references_dir = self.data_dir / "references"
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        self.references_dir.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def lock(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(session_id, threading.Lock())

    def reference(self, name: str) -> ReferenceObject:
        for path in sorted(self.references_dir.glob("*.json")):
            try:
                ref = load_reference(path)
            except MeasureError:
                continue
            if ref.name == name:
                return ref
        try:
            return bundled_reference(name)
        except ParseError:
            raise UnknownReference(f"no reference object named {name!r}") from None

    def _doc_path(self, session_id: str) -> Path:
        return self.sessions_dir / f"{session_id}.json"

    def _image_path(self, session_id: str) -> Path:
        return self.sessions_dir / f"{session_id}.image"

    def create(self, image_bytes: bytes, reference_name: str) -> dict:
        self.reference(reference_name)  # raises UnknownReference early
        info = _validate_image(image_bytes)
        session_id = uuid.uuid4().hex
        doc = {
            "id": session_id,
            "reference": reference_name,
            "image": info,
            "correspondences": {},
            "calibration": None,
            "measurements": [],
            "created": _now(),
            "updated": _now(),
        }
        _atomic_write(self._image_path(session_id), image_bytes)
        self._save(doc)
        return doc

    def load(self, session_id: str) -> dict:
        path = self._doc_path(session_id)
        if not path.exists():
            raise SessionNotFound(f"no session {session_id!r}")
        return json.loads(path.read_text(encoding="utf-8"))

    def image_bytes(self, session_id: str) -> bytes:
        path = self._image_path(session_id)
        if not path.exists():
            raise SessionNotFound(f"no session {session_id!r}")
        return path.read_bytes()

    def _save(self, doc: dict) -> None:
        doc["updated"] = _now()
        payload = json.dumps(doc, indent=2, sort_keys=True).encode("utf-8")
        _atomic_write(self._doc_path(doc["id"]), payload)


def _session_corrs(doc: dict) -> dict[str, list[Correspondence]]:
    return {
        fid: [Correspondence(template=(r[0], r[1]), image=(r[2], r[3])) for r in rows]
        for fid, rows in doc["correspondences"].items()
    }


def create_app(data_dir: str | Path | None = None, ui_dir: str | Path | None = None) -> FastAPI:
    data_dir = Path(data_dir or os.environ.get(DATA_DIR_ENV, "svmeasure-data"))
    store = SessionStore(data_dir)
    app = FastAPI(title="svmeasure", version="0.1.0")
    app.state.store = store

    @app.exception_handler(MeasureError)
    async def measure_error_handler(_: Request, exc: MeasureError):
        status = _STATUS_BY_CODE.get(exc.code, _DEFAULT_STATUS)
        return JSONResponse(
            status_code=status,
            content={"error": {"code": exc.code, "message": str(exc)}},
        )

    @app.post("/sessions", status_code=201)
    def create_session(
        image: UploadFile = File(...), reference: str = Form(...)
    ) -> dict:
        data = image.file.read()
        doc = store.create(data, reference)
        return {"id": doc["id"], "reference": doc["reference"], "image": doc["image"]}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        with store.lock(session_id):
            return store.load(session_id)

    @app.get("/sessions/{session_id}/image")
    def get_session_image(session_id: str) -> Response:
        with store.lock(session_id):
            doc = store.load(session_id)
            data = store.image_bytes(session_id)
        media = "image/png" if doc["image"]["format"] == "PNG" else "image/jpeg"
        return Response(content=data, media_type=media)

    @app.put("/sessions/{session_id}/faces/{face_id}/correspondences")
    def put_correspondences(
        session_id: str, face_id: str, body: CorrespondencesBody
    ) -> dict:
        with store.lock(session_id):
            doc = store.load(session_id)
            ref = store.reference(doc["reference"])
            if ref.face(face_id) is None:
                raise ValidationError(
                    f"reference {ref.name!r} has no face {face_id!r}"
                )
            doc["correspondences"][face_id] = [
                [c.template[0], c.template[1], c.image[0], c.image[1]]
                for c in body.correspondences
            ]
            # Any correspondence edit invalidates derived state; the
            # measurement history belongs to the discarded calibration.
            doc["calibration"] = None
            doc["measurements"] = []
            store._save(doc)
            return {
                "id": session_id,
                "face_id": face_id,
                "count": len(body.correspondences),
            }

    @app.post("/sessions/{session_id}/calibrate")
    def calibrate_session(session_id: str, body: CalibrateBody | None = None) -> dict:
        cfg = (body or CalibrateBody()).to_config()
        with store.lock(session_id):
            doc = store.load(session_id)
            ref = store.reference(doc["reference"])
            cal = calibrate(ref, _session_corrs(doc), cfg)
            doc["calibration"] = calibration_to_dict(cal)
            store._save(doc)
            return doc["calibration"]

    @app.post("/sessions/{session_id}/measurements", status_code=201)
    def measure_session(session_id: str, body: MeasureBody) -> dict:
        with store.lock(session_id):
            doc = store.load(session_id)
            if not doc["calibration"]:
                raise CalibrationRequired(
                    "session has no calibration; calibrate before measuring"
                )
            cal = calibration_from_dict(doc["calibration"])
            m = measure_height(
                cal, Homog3.point(*body.b), Homog3.point(*body.t)
            )
            result = measurement_to_dict(m)
            doc["measurements"].append(result)
            store._save(doc)
            return result

    @app.get("/references/{name}")
    def get_reference(name: str) -> dict:
        from .reference import reference_to_dict

        return reference_to_dict(store.reference(name))

    ui_path = Path(ui_dir or os.environ.get(UI_DIR_ENV, "frontend/dist"))
    if ui_path.is_dir():
        app.mount("/", StaticFiles(directory=ui_path, html=True), name="ui")
    else:

        @app.get("/")
        def index() -> dict:
            return {"service": "svmeasure", "ui": "not built"}

    return app
