"""Height measurement from vanishing geometry.

Given per-face homographies of a known reference object, this module
derives the vanishing line of the ground plane, the vanishing point of
the reference direction, and a metric factor anchored by the known
reference height. Heights of other points on the ground plane then
follow from the cross-ratio relation

    Z = |b x t| / (alpha * |l . b| * |v x t|)

with the base/top points scaled to third component 1 and the vanishing
entities to unit norm. Magnitudes are taken throughout, so the result
is positive and independent of the arbitrary homogeneous scale of every
input, provided alpha comes from the companion relation below.

The metric factor is fixed by the imaged reference segment (b_r, t_r)
of known length Z_r:

    alpha = |b_r x t_r| / (|l . b_r| * |v x t_r| * Z_r)

Before either relation is evaluated, the top point is projected onto
the line joining the vanishing point with the base point, so both
relations always see a top point exactly on the reference direction
through the base. That keeps the pair of equations self-consistent:
measuring the reference segment returns Z_r to floating-point accuracy.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateDirection,
    DegenerateGeometry,
    DegenerateInput,
    DegeneratePair,
    MissingFace,
    NotFinite,
    ValidationError,
    ZeroLength,
)
from .geometry import (
    Homog3,
    cross,
    incidence_residual,
    normalize,
    project_onto_line,
    projectively_equal,
)
from .homography import RansacConfig, apply_point, map_line, ransac_homography
from .reference import (
    GROUND_ROLE,
    PARALLEL_TOL_RAD,
    REFERENCE_ROLE,
    ReferenceObject,
    _direction_angle,
    template_lines,
)

# |l . b| below this (l unit norm, b at w=1) puts the base effectively
# on the vanishing line: no measurement is possible.
HORIZON_HARD_LIMIT = 1e-6

# Below this the measurement is still returned but flagged.
HORIZON_SOFT_LIMIT = 1e-3

# Unit-normalized residual below which v lying on l counts as the
# reference direction being parallel to the ground plane.
V_ON_L_LIMIT = 1e-9

ZERO_SEGMENT_PX = 1e-9


@dataclass(frozen=True)
class Calibration:
    """Scene geometry derived from one calibrated photograph.

    l and v are stored unit-norm, b_r and t_r with third component 1;
    alpha is in 1/mm. diagnostics carries per-face inlier statistics and
    consistency residuals as a JSON-ready dict.
    """

    l: Homog3
    v: Homog3
    b_r: Homog3
    t_r: Homog3
    alpha: float
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Measurement:
    b_x: Homog3
    t_x_raw: Homog3
    t_x_aligned: Homog3
    Z_x: float
    alignment_shift: float
    low_confidence: bool = False


def _unit(x: Homog3) -> np.ndarray:
    v = x.vec
    return v / float(np.linalg.norm(v))


def unit_canonical(x: Homog3) -> Homog3:
    """Unit-norm representative with the first nonzero component positive."""
    u = _unit(x)
    for comp in u:
        if comp != 0.0:
            if comp < 0.0:
                u = -u
            break
    return Homog3.from_vec(u)


def _finite(x: Homog3, what: str) -> np.ndarray:
    """Vector scaled to third component 1, or DegenerateGeometry."""
    try:
        px, py = x.xy()
    except NotFinite as exc:
        raise DegenerateGeometry(f"{what} is a point at infinity") from exc
    return np.array([px, py, 1.0])


def vanishing_point_of_pair(l1: Homog3, l2: Homog3) -> Homog3:
    """Intersection of the images of two parallel scene lines."""
    try:
        return normalize(cross(l1, l2))
    except DegenerateInput as exc:
        raise DegeneratePair("pair lines are projectively equal") from exc


def vanishing_line_of_plane(vp1: Homog3, vp2: Homog3) -> Homog3:
    """Join of two vanishing points of directions inside one plane."""
    try:
        return normalize(cross(vp1, vp2))
    except DegenerateInput as exc:
        raise DegeneratePair("vanishing points are projectively equal") from exc


def align_input(v: Homog3, b_x: Homog3, t_x_raw: Homog3) -> Homog3:
    """Snap a picked top point onto the reference direction through the base.

    Returns the Euclidean foot of t_x_raw on the line joining v and b_x,
    so the line through the base and the returned point passes through
    the vanishing point.
    """
    if projectively_equal(v, b_x):
        raise DegenerateDirection("vanishing point coincides with the base point")
    snap_line = cross(v, b_x)
    return project_onto_line(t_x_raw, snap_line)


def metric_factor(
    l: Homog3, v: Homog3, b_r: Homog3, t_r: Homog3, reference_height: float
) -> float:
    """Metric factor alpha anchoring image cross ratios to millimeters.

    The top point is aligned onto the reference direction through the
    base before the ratio is formed; see the module docstring.
    """
    if reference_height <= 0:
        raise DegenerateGeometry("reference height must be positive")
    b = _finite(b_r, "reference base")
    l_hat = _unit(l)
    v_hat = _unit(v)
    if projectively_equal(v, b_r):
        raise DegenerateGeometry("vanishing point coincides with the reference base")
    t_aligned = align_input(v, b_r, t_r)
    t = _finite(t_aligned, "reference top")
    lb = abs(float(l_hat @ b))
    if lb < HORIZON_HARD_LIMIT:
        raise DegenerateGeometry("reference base lies on the vanishing line")
    if float(np.linalg.norm(b[:2] - t[:2])) < ZERO_SEGMENT_PX:
        raise DegenerateGeometry("reference base and top coincide")
    vt = float(np.linalg.norm(np.cross(v_hat, t)))
    if vt <= 1e-12 * float(np.linalg.norm(t)):
        raise DegenerateGeometry("reference top coincides with the vanishing point")
    bt = float(np.linalg.norm(np.cross(b, t)))
    return bt / (lb * vt) / reference_height


def measure_height(cal: Calibration, b_x: Homog3, t_x_raw: Homog3) -> Measurement:
    """Height in millimeters of the segment picked as (base, top).

    The raw top pick is first snapped onto the reference direction
    through the base; the returned Measurement carries both points plus
    the snap distance so callers can draw the correction.
    """
    b = _finite(b_x, "base point")
    l_hat = _unit(cal.l)
    v_hat = _unit(cal.v)
    lb = abs(float(l_hat @ b))
    if lb < HORIZON_HARD_LIMIT:
        raise DegenerateGeometry("base point lies on the vanishing line")
    low_confidence = lb < HORIZON_SOFT_LIMIT

    t_aligned = align_input(cal.v, b_x, t_x_raw)
    t = _finite(t_aligned, "aligned top point")
    t_raw = _finite(t_x_raw, "top point")
    shift = float(np.linalg.norm(t[:2] - t_raw[:2]))

    if float(np.linalg.norm(b[:2] - t[:2])) < ZERO_SEGMENT_PX:
        raise ZeroLength("base and aligned top coincide")
    vt = float(np.linalg.norm(np.cross(v_hat, t)))
    if vt <= 1e-12 * float(np.linalg.norm(t)):
        raise DegenerateGeometry("top point coincides with the vanishing point")
    bt = float(np.linalg.norm(np.cross(b, t)))
    z = bt / (cal.alpha * lb * vt)
    return Measurement(
        b_x=Homog3.from_vec(b),
        t_x_raw=Homog3.from_vec(t_raw),
        t_x_aligned=Homog3.from_vec(t),
        Z_x=z,
        alignment_shift=shift,
        low_confidence=low_confidence,
    )


def _line_pair_angle(la: Homog3, lb: Homog3) -> float:
    """Angle between the directions of two image lines, in radians."""
    a1, b1 = la.vec[0], la.vec[1]
    a2, b2 = lb.vec[0], lb.vec[1]
    return _direction_angle((a1, b1), (a2, b2))


def _vp_line_residual(vp: Homog3, line: Homog3) -> float:
    """Consistency of a vanishing point with a line that should contain it.

    Euclidean pixels for finite points; for ideal points the
    unit-normalized incidence product is reported instead.
    """
    if vp.is_ideal():
        return abs(float(_unit(line) @ _unit(vp)))
    return incidence_residual(vp, line)


def calibrate(
    ref: ReferenceObject,
    corrs_per_face: dict,
    cfg: RansacConfig | None = None,
) -> Calibration:
    """Full pipeline: homographies, vanishing geometry, metric factor.

    corrs_per_face maps face_id to a list of Correspondence. At least
    one ground-plane face and the anchor-bearing reference face must be
    present.
    """
    cfg = cfg or RansacConfig()
    known = {f.face_id for f in ref.faces}
    for fid in corrs_per_face:
        if fid not in known:
            raise ValidationError(f"correspondences given for unknown face {fid!r}")

    present = {fid for fid, corrs in corrs_per_face.items() if corrs}
    ground_faces = [f for f in ref.faces_with_role(GROUND_ROLE) if f.face_id in present]
    if not ground_faces:
        raise MissingFace("no correspondences for any ground_plane_face")
    ref_face = ref.anchor_face
    if ref_face.face_id not in present:
        raise MissingFace(
            f"no correspondences for reference face {ref_face.face_id!r}"
        )
    gface = ground_faces[0]

    reports = {}
    for face in (gface, ref_face):
        reports[face.face_id] = ransac_homography(corrs_per_face[face.face_id], cfg)

    # Ground plane: vanishing point per declared pair, line from the
    # first two pairs with distinct template directions.
    g_h = reports[gface.face_id].homography
    g_image_pairs = [
        (map_line(g_h, la), map_line(g_h, lb)) for la, lb in template_lines(gface)
    ]
    g_vps = [vanishing_point_of_pair(la, lb) for la, lb in g_image_pairs]
    g_dirs = gface.pair_directions()
    first = 0
    second = next(
        (
            j
            for j in range(1, len(g_dirs))
            if _direction_angle(g_dirs[first], g_dirs[j]) > PARALLEL_TOL_RAD
        ),
        None,
    )
    if second is None:
        raise DegenerateGeometry("ground face pairs share a single direction")
    l = vanishing_line_of_plane(g_vps[first], g_vps[second])
    l_unit = unit_canonical(l)
    ground_extra = [
        _vp_line_residual(g_vps[j], l)
        for j in range(len(g_vps))
        if j not in (first, second)
    ]

    # Reference direction: among pairs aligned with +y, take the pair
    # whose image lines meet at the widest angle (best conditioned);
    # the rest only cross-check v.
    r_h = reports[ref_face.face_id].homography
    r_dirs = ref_face.pair_directions()
    aligned_idx = [
        i
        for i, d in enumerate(r_dirs)
        if _direction_angle(d, (0.0, 1.0)) <= PARALLEL_TOL_RAD
    ]
    r_image_pairs = [
        (map_line(r_h, la), map_line(r_h, lb)) for la, lb in template_lines(ref_face)
    ]
    best_idx = max(aligned_idx, key=lambda i: _line_pair_angle(*r_image_pairs[i]))
    v = vanishing_point_of_pair(*r_image_pairs[best_idx])
    v_unit = unit_canonical(v)
    ref_extra = [
        _vp_line_residual(v, line)
        for i in aligned_idx
        if i != best_idx
        for line in r_image_pairs[i]
    ]

    v_on_l = abs(float(l_unit.vec @ v_unit.vec))
    if v_on_l < V_ON_L_LIMIT:
        raise DegenerateGeometry(
            "reference direction is parallel to the ground plane"
        )

    b_r = Homog3.from_vec(
        _finite(apply_point(r_h, Homog3.point(*ref.base_anchor)), "mapped base anchor")
    )
    t_r_mapped = Homog3.from_vec(
        _finite(apply_point(r_h, Homog3.point(*ref.top_anchor)), "mapped top anchor")
    )
    if projectively_equal(v, t_r_mapped):
        raise DegenerateGeometry("mapped top anchor coincides with the vanishing point")
    try:
        t_r = align_input(v, b_r, t_r_mapped)
    except DegenerateDirection as exc:
        raise DegenerateGeometry(str(exc)) from exc
    ref_shift = float(
        np.linalg.norm(np.array(t_r.xy()) - np.array(t_r_mapped.xy()))
    )

    alpha = metric_factor(l_unit, v_unit, b_r, t_r, ref.reference_height)

    diagnostics = {
        "faces": {
            fid: {
                "n_correspondences": len(corrs_per_face[fid]),
                "n_inliers": sum(rep.inlier_mask),
                "mean_inlier_error_px": rep.mean_inlier_error,
                "iterations_run": rep.iterations_run,
            }
            for fid, rep in reports.items()
        },
        "ground_face": gface.face_id,
        "reference_face": ref_face.face_id,
        "ground_extra_vp_residuals": ground_extra,
        "reference_pair_index": best_idx,
        "reference_extra_line_residuals": ref_extra,
        "reference_alignment_shift_px": ref_shift,
        "v_on_l_residual": v_on_l,
        # imaged template pair lines, drawable by clients as-is
        "image_lines": {
            gface.face_id: [
                [list(unit_canonical(la).vec), list(unit_canonical(lb).vec)]
                for la, lb in g_image_pairs
            ],
            ref_face.face_id: [
                [list(unit_canonical(la).vec), list(unit_canonical(lb).vec)]
                for la, lb in r_image_pairs
            ],
        },
    }
    return Calibration(
        l=l_unit,
        v=v_unit,
        b_r=normalize(b_r),
        t_r=normalize(t_r),
        alpha=alpha,
        diagnostics=diagnostics,
    )


def calibration_to_dict(cal: Calibration) -> dict:
    return {
        "l": list(cal.l.vec),
        "v": list(cal.v.vec),
        "b_r": list(cal.b_r.vec),
        "t_r": list(cal.t_r.vec),
        "alpha": cal.alpha,
        "diagnostics": cal.diagnostics,
    }


def calibration_from_dict(raw: dict) -> Calibration:
    return Calibration(
        l=Homog3.from_vec(raw["l"]),
        v=Homog3.from_vec(raw["v"]),
        b_r=Homog3.from_vec(raw["b_r"]),
        t_r=Homog3.from_vec(raw["t_r"]),
        alpha=float(raw["alpha"]),
        diagnostics=dict(raw.get("diagnostics", {})),
    )


def save_calibration(cal: Calibration, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(calibration_to_dict(cal), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def load_calibration(path: str | Path) -> Calibration:
    return calibration_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def measurement_to_dict(m: Measurement) -> dict:
    return {
        "b_x": list(m.b_x.vec),
        "t_x_raw": list(m.t_x_raw.vec),
        "t_x_aligned": list(m.t_x_aligned.vec),
        "height_mm": m.Z_x,
        "alignment_shift_px": m.alignment_shift,
        "low_confidence": m.low_confidence,
    }
