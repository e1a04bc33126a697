"""Ground-truth scene generator used as the measurement oracle.

A pinhole camera views the reference object sitting on the world ground
plane (z = 0, z up). The generator emits exactly what the real pipeline
ingests: per-face correspondences (optionally noisy, optionally with
labeled outliers), plus the true homographies, vanishing geometry, and
true object heights to compare against.

Face mounting convention: the anchor-bearing reference face stands
vertically in the plane y = 0 with template (u, w) at world (u, 0, w);
the first ground-plane face lies horizontally at the reference face's
top edge, template (u, w) at world (u, w, face_height). This matches a
printed box with its front and top faces declared.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BehindCamera, InvalidPose
from .geometry import Homog3, normalize
from .homography import Correspondence, Homography, write_correspondences_csv
from .reference import GROUND_ROLE, ReferenceObject
from .metrology import unit_canonical

# Pose rejection: every corner of a used face must be strictly front
# facing and the face-center viewing cosine must clear this margin so
# the face is not seen edge-on.
FACE_COSINE_MARGIN = 0.1

MAX_POSE_ATTEMPTS = 500

# Planted outliers keep at least this many sigmas plus the default
# inlier threshold between themselves and the true projection, so
# rejection tests are well posed.
OUTLIER_CLEARANCE_SIGMAS = 5.0
OUTLIER_CLEARANCE_BASE_PX = 3.0


@dataclass(frozen=True, eq=False)
class Camera:
    """Pinhole camera: intrinsics in pixels, pose mapping world to camera."""

    fx: float
    fy: float
    cx: float
    cy: float
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=float)
        t = np.asarray(self.translation, dtype=float)
        if r.shape != (3, 3) or t.shape != (3,):
            raise ValueError("rotation must be 3x3 and translation length 3")
        if float(np.abs(r.T @ r - np.eye(3)).max()) > 1e-10:
            raise ValueError("rotation is not orthonormal")
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        center = -r.T @ t
        if abs(float(center[2])) < 1e-9:
            raise InvalidPose("camera center lies on the ground plane")
        r.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @property
    def k(self) -> np.ndarray:
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )

    @property
    def center(self) -> np.ndarray:
        return -self.rotation.T @ self.translation


def look_at_camera(
    center, target, fx: float, fy: float, cx: float, cy: float
) -> Camera:
    """Camera at ``center`` looking at ``target`` with image y pointing down."""
    center = np.asarray(center, dtype=float)
    target = np.asarray(target, dtype=float)
    forward = target - center
    norm = float(np.linalg.norm(forward))
    if norm < 1e-9:
        raise InvalidPose("camera center coincides with the look target")
    z_c = forward / norm
    up = np.array([0.0, 0.0, 1.0])
    x_c = np.cross(z_c, up)
    xn = float(np.linalg.norm(x_c))
    if xn < 1e-9:
        raise InvalidPose("camera looks straight along the vertical")
    x_c /= xn
    y_c = np.cross(z_c, x_c)
    r = np.vstack([x_c, y_c, z_c])
    return Camera(fx=fx, fy=fy, cx=cx, cy=cy, rotation=r, translation=-r @ center)


def project(cam: Camera, point_mm) -> Homog3:
    """Pinhole projection of a world point (mm) to homogeneous pixels."""
    x = np.asarray(point_mm, dtype=float)
    xc = cam.rotation @ x + cam.translation
    if xc[2] <= 0.0:
        raise BehindCamera(f"point {point_mm} has non-positive depth {xc[2]:.3f}")
    return Homog3.point(
        cam.fx * xc[0] / xc[2] + cam.cx, cam.fy * xc[1] / xc[2] + cam.cy
    )


@dataclass(frozen=True)
class FacePlacement:
    """3D mounting of a face template: origin and in-plane axes (mm)."""

    origin: np.ndarray
    axis_u: np.ndarray
    axis_w: np.ndarray

    def world_point(self, u: float, w: float) -> np.ndarray:
        return self.origin + u * self.axis_u + w * self.axis_w

    @property
    def normal(self) -> np.ndarray:
        return np.cross(self.axis_u, self.axis_w)


def face_placements(ref: ReferenceObject) -> dict[str, FacePlacement]:
    """Box-style mounting of the anchor face and the first ground face."""
    ref_face = ref.anchor_face
    ground = ref.faces_with_role(GROUND_ROLE)[0]
    ex = np.array([1.0, 0.0, 0.0])
    ey = np.array([0.0, 1.0, 0.0])
    ez = np.array([0.0, 0.0, 1.0])
    return {
        ref_face.face_id: FacePlacement(np.zeros(3), ex, ez),
        ground.face_id: FacePlacement(
            np.array([0.0, 0.0, ref_face.height]), ex, ey
        ),
    }


def true_face_homography(cam: Camera, place: FacePlacement) -> Homography:
    """Template-to-image map composed from the camera and the face pose."""
    p = cam.k @ np.hstack([cam.rotation, cam.translation[:, None]])
    cols = np.column_stack(
        [
            np.append(place.axis_u, 0.0),
            np.append(place.axis_w, 0.0),
            np.append(place.origin, 1.0),
        ]
    )
    return Homography(p @ cols)


def true_vanishing_point(cam: Camera, direction) -> Homog3:
    """Image of a world direction's point at infinity."""
    d = np.asarray(direction, dtype=float)
    return normalize(Homog3.from_vec(cam.k @ cam.rotation @ d))


def true_ground_vanishing_line(cam: Camera) -> Homog3:
    vx = true_vanishing_point(cam, [1.0, 0.0, 0.0])
    vy = true_vanishing_point(cam, [0.0, 1.0, 0.0])
    return unit_canonical(Homog3.from_vec(np.cross(vx.vec, vy.vec)))


@dataclass(frozen=True)
class PoseRanges:
    """Random-pose sampling ranges; angles in degrees, lengths in mm."""

    elevation_deg: tuple[float, float] = (10.0, 60.0)
    distance_mm: tuple[float, float] = (300.0, 2000.0)
    azimuth_deg: tuple[float, float] = (0.0, 360.0)
    focal_px: tuple[float, float] = (1200.0, 2000.0)
    principal_point: tuple[float, float] = (640.0, 480.0)


@dataclass(frozen=True)
class SceneConfig:
    reference: ReferenceObject
    object_heights: tuple[float, ...] = (50.0, 100.0, 170.0)
    camera: Camera | None = None
    pose_ranges: PoseRanges = field(default_factory=PoseRanges)
    noise_sigma: float = 0.0
    outlier_fraction: float = 0.0
    seed: int = 0
    grid_size: int = 5

    def __post_init__(self):
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        if not 0.0 <= self.outlier_fraction < 1.0:
            raise ValueError("outlier_fraction must be in [0, 1)")
        if any(h <= 0 for h in self.object_heights):
            raise ValueError("object heights must be positive")
        if self.grid_size < 2:
            raise ValueError("grid_size must be at least 2")


@dataclass(frozen=True)
class ObjectTruth:
    ground_xy: tuple[float, float]
    height_mm: float
    base_image: Homog3
    top_image: Homog3


@dataclass(frozen=True)
class SyntheticScene:
    config: SceneConfig
    camera: Camera
    correspondences: dict[str, list[Correspondence]]
    outlier_masks: dict[str, tuple[bool, ...]]
    true_homographies: dict[str, Homography]
    true_l: Homog3
    true_v: Homog3
    true_b_r: Homog3
    true_t_r: Homog3
    objects: tuple[ObjectTruth, ...]


def _face_visible(cam: Camera, ref: ReferenceObject, place: FacePlacement, face) -> bool:
    n = place.normal
    n = n / np.linalg.norm(n)
    center = place.world_point(face.width / 2.0, face.height / 2.0)
    to_cam = cam.center - center
    if float(n @ to_cam) / float(np.linalg.norm(to_cam)) < FACE_COSINE_MARGIN:
        return False
    for u, w in (
        (0.0, 0.0),
        (face.width, 0.0),
        (0.0, face.height),
        (face.width, face.height),
    ):
        corner = place.world_point(u, w)
        if float(n @ (cam.center - corner)) <= 0.0:
            return False
    return True


def _points_in_front(cam: Camera, points) -> bool:
    for p in points:
        xc = cam.rotation @ np.asarray(p, dtype=float) + cam.translation
        if xc[2] <= 1.0:
            return False
    return True


def _sample_camera(cfg: SceneConfig, rng: np.random.Generator) -> Camera:
    ref = cfg.reference
    ranges = cfg.pose_ranges
    ref_face = ref.anchor_face
    ground = ref.faces_with_role(GROUND_ROLE)[0]
    target = np.array(
        [ref_face.width / 2.0, ground.height / 2.0, ref_face.height / 2.0]
    )
    places = face_placements(ref)
    faces = {ref_face.face_id: ref_face, ground.face_id: ground}
    corners = [
        places[fid].world_point(u, w)
        for fid, f in faces.items()
        for u, w in ((0, 0), (f.width, 0), (0, f.height), (f.width, f.height))
    ]
    for _ in range(MAX_POSE_ATTEMPTS):
        elev = math.radians(rng.uniform(*ranges.elevation_deg))
        dist = rng.uniform(*ranges.distance_mm)
        azim = math.radians(rng.uniform(*ranges.azimuth_deg))
        focal = rng.uniform(*ranges.focal_px)
        center = target + dist * np.array(
            [
                math.cos(elev) * math.cos(azim),
                math.cos(elev) * math.sin(azim),
                math.sin(elev),
            ]
        )
        cam = look_at_camera(
            center,
            target,
            fx=focal,
            fy=focal,
            cx=ranges.principal_point[0],
            cy=ranges.principal_point[1],
        )
        if not _points_in_front(cam, corners):
            continue
        if all(_face_visible(cam, ref, places[fid], faces[fid]) for fid in faces):
            return cam
    raise InvalidPose("could not sample a pose with all used faces visible")


def _grid(face, n: int) -> list[tuple[float, float]]:
    us = np.linspace(0.0, face.width, n)
    ws = np.linspace(0.0, face.height, n)
    return [(float(u), float(w)) for w in ws for u in us]


def generate(cfg: SceneConfig) -> SyntheticScene:
    """Render a deterministic ground-truth scene from the config."""
    rng = np.random.default_rng(cfg.seed)
    ref = cfg.reference
    places = face_placements(ref)
    faces = {fid: ref.face(fid) for fid in places}

    if cfg.camera is not None:
        cam = cfg.camera
        corners = [
            places[fid].world_point(u, w)
            for fid, f in faces.items()
            for u, w in ((0, 0), (f.width, 0), (0, f.height), (f.width, f.height))
        ]
        if not _points_in_front(cam, corners):
            raise InvalidPose("reference object is not fully in front of the camera")
        for fid in faces:
            if not _face_visible(cam, ref, places[fid], faces[fid]):
                raise InvalidPose(f"face {fid!r} is not front-facing")
    else:
        cam = _sample_camera(cfg, rng)

    clearance = OUTLIER_CLEARANCE_SIGMAS * cfg.noise_sigma + OUTLIER_CLEARANCE_BASE_PX
    region = (2.0 * cam.cx, 2.0 * cam.cy)

    correspondences: dict[str, list[Correspondence]] = {}
    outlier_masks: dict[str, tuple[bool, ...]] = {}
    true_h: dict[str, Homography] = {}
    for fid, face in faces.items():
        place = places[fid]
        true_h[fid] = true_face_homography(cam, place)
        grid = _grid(face, cfg.grid_size)
        exact = [project(cam, place.world_point(u, w)).xy() for u, w in grid]
        image = np.array(exact)
        if cfg.noise_sigma > 0:
            image = image + rng.normal(0.0, cfg.noise_sigma, image.shape)
        n_out = int(math.floor(cfg.outlier_fraction * len(grid)))
        mask = np.zeros(len(grid), dtype=bool)
        if n_out:
            chosen = rng.choice(len(grid), size=n_out, replace=False)
            for i in chosen:
                while True:
                    candidate = rng.uniform((0.0, 0.0), region)
                    if np.linalg.norm(candidate - np.asarray(exact[i])) >= clearance:
                        break
                image[i] = candidate
                mask[i] = True
        correspondences[fid] = [
            Correspondence(template=grid[i], image=(float(image[i, 0]), float(image[i, 1])))
            for i in range(len(grid))
        ]
        outlier_masks[fid] = tuple(bool(b) for b in mask)

    true_v = true_vanishing_point(cam, [0.0, 0.0, 1.0])
    true_l = true_ground_vanishing_line(cam)
    ref_place = places[ref.anchor_face.face_id]
    true_b_r = project(cam, ref_place.world_point(*ref.base_anchor))
    true_t_r = project(cam, ref_place.world_point(*ref.top_anchor))

    objects = []
    width = ref.anchor_face.width
    for height in cfg.object_heights:
        for _ in range(100):
            gx = float(rng.uniform(-0.8 * width, 1.8 * width))
            gy = float(rng.uniform(-0.8 * width, 1.8 * width))
            base_w = np.array([gx, gy, 0.0])
            top_w = np.array([gx, gy, float(height)])
            if _points_in_front(cam, [base_w, top_w]):
                break
        else:
            raise InvalidPose("could not place a test object in front of the camera")
        objects.append(
            ObjectTruth(
                ground_xy=(gx, gy),
                height_mm=float(height),
                base_image=project(cam, base_w),
                top_image=project(cam, top_w),
            )
        )

    return SyntheticScene(
        config=cfg,
        camera=cam,
        correspondences=correspondences,
        outlier_masks=outlier_masks,
        true_homographies=true_h,
        true_l=true_l,
        true_v=true_v,
        true_b_r=true_b_r,
        true_t_r=true_t_r,
        objects=tuple(objects),
    )


def scene_truth_dict(scene: SyntheticScene) -> dict:
    cam = scene.camera
    return {
        "camera": {
            "fx": cam.fx,
            "fy": cam.fy,
            "cx": cam.cx,
            "cy": cam.cy,
            "rotation": [list(row) for row in cam.rotation],
            "translation": list(cam.translation),
        },
        "homographies": {
            fid: [list(row) for row in h.m] for fid, h in scene.true_homographies.items()
        },
        "l": list(scene.true_l.vec),
        "v": list(scene.true_v.vec),
        "b_r": list(scene.true_b_r.vec),
        "t_r": list(scene.true_t_r.vec),
        "objects": [
            {
                "ground_xy": list(o.ground_xy),
                "height_mm": o.height_mm,
                "base": list(o.base_image.xy()),
                "top": list(o.top_image.xy()),
            }
            for o in scene.objects
        ],
        "outlier_masks": {fid: list(m) for fid, m in scene.outlier_masks.items()},
        "reference": scene.config.reference.name,
        "seed": scene.config.seed,
        "noise_sigma": scene.config.noise_sigma,
        "outlier_fraction": scene.config.outlier_fraction,
    }


def write_fixture(scene: SyntheticScene, directory: str | Path) -> None:
    """Persist a scene in the formats the real pipeline ingests."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for fid, corrs in scene.correspondences.items():
        write_correspondences_csv(directory / f"corrs_{fid}.csv", corrs)
    (directory / "truth.json").write_text(
        json.dumps(scene_truth_dict(scene), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
