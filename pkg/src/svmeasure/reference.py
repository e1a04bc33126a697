"""Declarative model of the physical reference object.

A reference object is a set of planar faces with known millimeter
templates. Each face declares pairs of parallel template segments; one
face role supplies ground-plane directions, the other the reference
(height) direction. Template origin is the bottom-left corner of each
face with y increasing upward, so the reference direction is +y on a
reference_direction_face and the bottom edge (y = 0) rests on the
ground plane.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

from .errors import ParseError, ValidationError
from .geometry import Homog3, cross

GROUND_ROLE = "ground_plane_face"
REFERENCE_ROLE = "reference_direction_face"

# Template segments are authored coordinates, exact up to decimal
# rounding; this absorbs that and nothing else.
PARALLEL_TOL_RAD = 1e-6

ANCHOR_LENGTH_TOL_MM = 0.1

Segment = tuple[float, float, float, float]


def _direction_angle(d1: tuple[float, float], d2: tuple[float, float]) -> float:
    """Unsigned angle in radians between two directions, orientation-blind."""
    cross_ = d1[0] * d2[1] - d1[1] * d2[0]
    dot = d1[0] * d2[0] + d1[1] * d2[1]
    return math.atan2(abs(cross_), abs(dot))


def _segment_direction(seg: Segment) -> tuple[float, float]:
    dx, dy = seg[2] - seg[0], seg[3] - seg[1]
    n = math.hypot(dx, dy)
    if n < 1e-12:
        raise ValidationError(f"segment {seg} has zero length")
    return dx / n, dy / n


@dataclass(frozen=True)
class FaceTemplate:
    face_id: str
    role: str
    width: float
    height: float
    line_pairs: tuple[tuple[Segment, Segment], ...]

    def __post_init__(self):
        if self.role not in (GROUND_ROLE, REFERENCE_ROLE):
            raise ValidationError(
                f"face {self.face_id!r}: unknown role {self.role!r}"
            )
        if self.width <= 0 or self.height <= 0:
            raise ValidationError(f"face {self.face_id!r}: non-positive extent")
        if not self.line_pairs:
            raise ValidationError(f"face {self.face_id!r}: no line pairs")
        directions = []
        for pair_idx, (seg_a, seg_b) in enumerate(self.line_pairs):
            for seg in (seg_a, seg_b):
                for x, y in ((seg[0], seg[1]), (seg[2], seg[3])):
                    if not (-1e-9 <= x <= self.width + 1e-9) or not (
                        -1e-9 <= y <= self.height + 1e-9
                    ):
                        raise ValidationError(
                            f"face {self.face_id!r} pair {pair_idx}: endpoint "
                            f"({x}, {y}) outside the {self.width}x{self.height} template"
                        )
            da = _segment_direction(seg_a)
            db = _segment_direction(seg_b)
            angle = _direction_angle(da, db)
            if angle > PARALLEL_TOL_RAD:
                raise ValidationError(
                    f"face {self.face_id!r} pair {pair_idx}: declared parallel "
                    f"segments are {angle:.2e} rad apart"
                )
            directions.append(da)
        if self.role == GROUND_ROLE:
            if len(self.line_pairs) < 2:
                raise ValidationError(
                    f"ground face {self.face_id!r} needs at least 2 line pairs"
                )
            spread = max(
                _direction_angle(directions[i], directions[j])
                for i in range(len(directions))
                for j in range(i + 1, len(directions))
            )
            if spread <= PARALLEL_TOL_RAD:
                raise ValidationError(
                    f"ground face {self.face_id!r}: all pair directions are parallel"
                )
        else:
            aligned = [
                d for d in directions if _direction_angle(d, (0.0, 1.0)) <= PARALLEL_TOL_RAD
            ]
            if not aligned:
                raise ValidationError(
                    f"reference face {self.face_id!r}: no pair aligned with the "
                    "reference (+y) direction"
                )

    def pair_directions(self) -> list[tuple[float, float]]:
        return [_segment_direction(pair[0]) for pair in self.line_pairs]


@dataclass(frozen=True)
class ReferenceObject:
    name: str
    faces: tuple[FaceTemplate, ...]
    reference_height: float
    base_anchor: tuple[float, float]
    top_anchor: tuple[float, float]

    def __post_init__(self):
        if self.reference_height <= 0:
            raise ValidationError("reference_height_mm must be positive")
        if len(self.faces) < 2:
            raise ValidationError("a reference object needs at least 2 faces")
        ids = [f.face_id for f in self.faces]
        if len(set(ids)) != len(ids):
            raise ValidationError("face ids must be unique")
        roles = {f.role for f in self.faces}
        if GROUND_ROLE not in roles or REFERENCE_ROLE not in roles:
            raise ValidationError(
                "need at least one ground_plane_face and one reference_direction_face"
            )
        bx, by = self.base_anchor
        tx, ty = self.top_anchor
        dist = math.hypot(tx - bx, ty - by)
        if abs(dist - self.reference_height) > ANCHOR_LENGTH_TOL_MM:
            raise ValidationError(
                f"anchor distance {dist:.4f} mm does not match "
                f"reference_height_mm {self.reference_height}"
            )
        # The anchors mark the metric segment along the reference
        # direction: vertical in the template, base on the ground edge.
        if ty <= by:
            raise ValidationError("top_anchor must sit above base_anchor")
        if _direction_angle((tx - bx, ty - by), (0.0, 1.0)) > PARALLEL_TOL_RAD:
            raise ValidationError("anchor segment is not along the +y direction")
        if abs(by) > 1e-6:
            raise ValidationError("base_anchor must lie on the bottom edge (y = 0)")
        face = self.anchor_face
        for x, y in (self.base_anchor, self.top_anchor):
            if not (-1e-9 <= x <= face.width + 1e-9) or not (
                -1e-9 <= y <= face.height + 1e-9
            ):
                raise ValidationError(
                    f"anchor ({x}, {y}) outside face {face.face_id!r}"
                )

    @property
    def anchor_face(self) -> FaceTemplate:
        """The reference-direction face carrying the anchors (first declared)."""
        return next(f for f in self.faces if f.role == REFERENCE_ROLE)

    def face(self, face_id: str) -> FaceTemplate | None:
        for f in self.faces:
            if f.face_id == face_id:
                return f
        return None

    def faces_with_role(self, role: str) -> list[FaceTemplate]:
        return [f for f in self.faces if f.role == role]


def template_lines(face: FaceTemplate) -> list[tuple[Homog3, Homog3]]:
    """Supporting homogeneous lines of each declared segment pair."""
    pairs = []
    for seg_a, seg_b in face.line_pairs:
        la = cross(Homog3.point(seg_a[0], seg_a[1]), Homog3.point(seg_a[2], seg_a[3]))
        lb = cross(Homog3.point(seg_b[0], seg_b[1]), Homog3.point(seg_b[2], seg_b[3]))
        pairs.append((la, lb))
    return pairs


def _face_from_dict(raw: dict) -> FaceTemplate:
    try:
        pairs = tuple(
            (tuple(float(v) for v in pair[0]), tuple(float(v) for v in pair[1]))
            for pair in raw["line_pairs"]
        )
        for pair in pairs:
            if len(pair[0]) != 4 or len(pair[1]) != 4:
                raise ParseError("each segment needs 4 coordinates [x1,y1,x2,y2]")
        return FaceTemplate(
            face_id=str(raw["face_id"]),
            role=str(raw["role"]),
            width=float(raw["width_mm"]),
            height=float(raw["height_mm"]),
            line_pairs=pairs,
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise ParseError(f"malformed face entry: {exc!r}") from exc


def reference_from_dict(raw: dict) -> ReferenceObject:
    try:
        return ReferenceObject(
            name=str(raw["name"]),
            faces=tuple(_face_from_dict(f) for f in raw["faces"]),
            reference_height=float(raw["reference_height_mm"]),
            base_anchor=tuple(float(v) for v in raw["base_anchor"]),
            top_anchor=tuple(float(v) for v in raw["top_anchor"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed reference spec: {exc!r}") from exc


def reference_to_dict(ref: ReferenceObject) -> dict:
    return {
        "name": ref.name,
        "reference_height_mm": ref.reference_height,
        "base_anchor": list(ref.base_anchor),
        "top_anchor": list(ref.top_anchor),
        "faces": [
            {
                "face_id": f.face_id,
                "role": f.role,
                "width_mm": f.width,
                "height_mm": f.height,
                "line_pairs": [[list(a), list(b)] for a, b in f.line_pairs],
            }
            for f in ref.faces
        ],
    }


def load_reference(path: str | Path) -> ReferenceObject:
    """Load and fully validate a reference spec JSON file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParseError(f"{path}: top level must be an object")
    return reference_from_dict(raw)


def save_reference(ref: ReferenceObject, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(reference_to_dict(ref), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def bundled_reference(name: str = "box_10cm") -> ReferenceObject:
    """Reference spec shipped with the package."""
    try:
        text = resources.files("svmeasure.data").joinpath(f"{name}.json").read_text()
    except FileNotFoundError as exc:
        raise ParseError(f"no bundled reference named {name!r}") from exc
    return reference_from_dict(json.loads(text))
