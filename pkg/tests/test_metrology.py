import math

import numpy as np
import pytest

from svmeasure.errors import (
    DegenerateDirection,
    DegenerateGeometry,
    DegeneratePair,
    MissingFace,
    ValidationError,
    ZeroLength,
)
from svmeasure.geometry import (
    Homog3,
    cross,
    incidence_residual,
    normalize,
    projectively_equal,
)
from svmeasure.homography import RansacConfig
from svmeasure.metrology import (
    Calibration,
    align_input,
    calibrate,
    calibration_to_dict,
    load_calibration,
    measure_height,
    metric_factor,
    save_calibration,
    vanishing_line_of_plane,
    vanishing_point_of_pair,
)
from svmeasure.synthetic import SceneConfig, generate, true_vanishing_point


def affine_calibration(alpha: float = 1.0) -> Calibration:
    """Fronto-parallel limit: l is the line at infinity, v points up."""
    return Calibration(
        l=Homog3(0, 0, 1),
        v=Homog3(0, 1, 0),
        b_r=Homog3(0, 0, 1),
        t_r=Homog3(0, 5, 1),
        alpha=alpha,
    )


class TestVanishingPointOfPair:
    def test_fronto_parallel_vertical_lines(self):
        vp = vanishing_point_of_pair(Homog3(1, 0, 0), Homog3(1, 0, -100))
        assert projectively_equal(vp, Homog3(0, 1, 0))

    def test_matches_camera_projection_of_direction(self, box_ref, clean_scene):
        from svmeasure.homography import map_line
        from svmeasure.reference import template_lines

        face = box_ref.anchor_face
        h = clean_scene.true_homographies[face.face_id]
        la, lb = [
            map_line(h, line) for line in template_lines(face)[0]
        ]
        vp = vanishing_point_of_pair(la, lb)
        expected = true_vanishing_point(clean_scene.camera, [0.0, 0.0, 1.0])
        assert projectively_equal(vp, expected, tol=1e-6)

    def test_equal_lines_degenerate(self):
        with pytest.raises(DegeneratePair):
            vanishing_point_of_pair(Homog3(1, 0, -5), Homog3(2, 0, -10))


class TestVanishingLineOfPlane:
    def test_fronto_parallel_ground(self):
        line = vanishing_line_of_plane(Homog3(1, 0, 0), Homog3(0, 1, 0))
        assert projectively_equal(line, Homog3(0, 0, 1))

    def test_two_constructions_agree(self, box_ref, clean_scene):
        # join of two ground-direction vanishing points vs the image of
        # the ground plane's line at infinity through the ground face map
        from svmeasure.homography import map_line

        ground = box_ref.faces_with_role("ground_plane_face")[0]
        h = clean_scene.true_homographies[ground.face_id]
        via_map = map_line(h, Homog3(0, 0, 1))
        assert projectively_equal(clean_scene.true_l, via_map, tol=1e-6)

    def test_coincident_points_degenerate(self):
        with pytest.raises(DegeneratePair):
            vanishing_line_of_plane(Homog3(1, 0, 0), Homog3(-2, 0, 0))


class TestAlignInput:
    def test_point_on_line_unchanged(self):
        v = Homog3(0, 1, 0)
        b = Homog3.point(10, 0)
        t = Homog3.point(10, 50)
        assert align_input(v, b, t) is t

    def test_vertical_snap_hand_case(self):
        # vertical direction at infinity, base at x=10: snap line is x=10
        aligned = align_input(Homog3(0, 1, 0), Homog3(10, 0, 1), Homog3(13, 50, 1))
        assert aligned.xy() == pytest.approx((10.0, 50.0))

    def test_shift_equals_incidence_residual(self, clean_calibration):
        cal = clean_calibration
        b = Homog3.point(400, 700)
        t_raw = Homog3.point(430, 500)
        aligned = align_input(cal.v, b, t_raw)
        shift = float(np.linalg.norm(np.array(aligned.xy()) - np.array(t_raw.xy())))
        assert shift == pytest.approx(
            incidence_residual(t_raw, cross(cal.v, b)), rel=1e-9
        )

    def test_coincident_v_and_base_degenerate(self):
        with pytest.raises(DegenerateDirection):
            align_input(Homog3(10, 20, 1), Homog3(20, 40, 2), Homog3(1, 1, 1))


class TestMetricFactor:
    def test_affine_limit_hand_value(self):
        alpha = metric_factor(
            Homog3(0, 0, 1), Homog3(0, 1, 0), Homog3(0, 0, 1), Homog3(0, 5, 1), 5.0
        )
        assert alpha == pytest.approx(1.0, rel=1e-12)

    def test_composition_returns_reference_height(self):
        # metric_factor then measure_height of the same segment is an
        # algebraic identity, whatever the configuration.
        rng = np.random.default_rng(17)
        for _ in range(50):
            l = Homog3(*rng.uniform(-1, 1, 3))
            v = Homog3.point(*rng.uniform(-2000, 2000, 2))
            b = Homog3.point(*rng.uniform(0, 1000, 2))
            t = Homog3.point(*rng.uniform(0, 1000, 2))
            z_r = float(rng.uniform(10, 500))
            try:
                alpha = metric_factor(l, v, b, t, z_r)
                cal = Calibration(l=l, v=v, b_r=b, t_r=t, alpha=alpha)
                m = measure_height(cal, b, t)
            except (DegenerateGeometry, DegenerateDirection, ZeroLength):
                continue
            assert m.Z_x == pytest.approx(z_r, rel=1e-9)

    def test_base_on_vanishing_line_degenerate(self):
        with pytest.raises(DegenerateGeometry):
            metric_factor(
                Homog3(0, 1, -50),  # line y = 50
                Homog3(0, 1, 0),
                Homog3(10, 50, 1),  # base on that line
                Homog3(10, 80, 1),
                100.0,
            )

    def test_non_positive_height_degenerate(self):
        with pytest.raises(DegenerateGeometry):
            metric_factor(
                Homog3(0, 0, 1), Homog3(0, 1, 0), Homog3(0, 0, 1), Homog3(0, 5, 1), 0.0
            )


class TestMeasureHeight:
    def test_affine_limit_hand_value(self):
        m = measure_height(affine_calibration(), Homog3(0, 0, 1), Homog3(0, 2, 1))
        assert m.Z_x == pytest.approx(2.0, rel=1e-12)
        assert m.alignment_shift == 0.0
        assert not m.low_confidence

    def test_reference_segment_self_consistency(self, clean_calibration):
        m = measure_height(clean_calibration, clean_calibration.b_r, clean_calibration.t_r)
        assert m.Z_x == pytest.approx(100.0, rel=1e-9)

    def test_true_heights_recovered_noise_free(self, clean_calibration, clean_scene):
        for obj in clean_scene.objects:
            m = measure_height(clean_calibration, obj.base_image, obj.top_image)
            assert m.Z_x == pytest.approx(obj.height_mm, rel=1e-6)

    def test_aligned_point_on_snap_line(self, clean_calibration):
        cal = clean_calibration
        b = Homog3.point(500, 650)
        t_raw = Homog3.point(540, 420)
        m = measure_height(cal, b, t_raw)
        assert incidence_residual(m.t_x_aligned, cross(cal.v, b)) < 1e-9

    def test_zero_length(self, clean_calibration):
        p = Homog3.point(400, 700)
        with pytest.raises(ZeroLength):
            measure_height(clean_calibration, p, p)

    def test_base_on_horizon_rejected(self, clean_calibration):
        cal = clean_calibration
        a, b, c = cal.l.vec
        x0 = 640.0
        y0 = -(a * x0 + c) / b
        with pytest.raises(DegenerateGeometry):
            measure_height(cal, Homog3.point(x0, y0), Homog3.point(x0, y0 + 200))

    def test_low_confidence_near_horizon(self, clean_calibration):
        cal = clean_calibration
        a, b, c = cal.l.vec
        hyp = math.hypot(a, b)
        x0 = 640.0
        y0 = -(a * x0 + c) / b
        # offset along the line normal so that |l . b_hat| is 5e-4,
        # inside the soft window (1e-6, 1e-3)
        d = 5e-4 / hyp
        bx = Homog3.point(x0 + d * a / hyp, y0 + d * b / hyp)
        m = measure_height(cal, bx, Homog3.point(x0, y0 + 300))
        assert m.low_confidence

    def test_monotone_along_reference_direction(self, clean_calibration):
        cal = clean_calibration
        b = np.array([520.0, 700.0])
        v_xy = np.array(cal.v.xy())
        direction = v_xy - b
        dist = float(np.linalg.norm(direction))
        direction /= dist
        heights = []
        for s in np.linspace(2.0, 0.9 * dist, 40):
            t = Homog3.point(*(b + s * direction))
            heights.append(measure_height(cal, Homog3.point(*b), t).Z_x)
        assert all(h2 > h1 for h1, h2 in zip(heights, heights[1:]))

    def test_coincident_v_and_base(self, clean_calibration):
        cal = clean_calibration
        with pytest.raises(DegenerateDirection):
            measure_height(cal, normalize(cal.v), Homog3.point(100, 100))


class TestCalibrate:
    def test_noise_free_matches_ground_truth(self, box_ref, clean_scene, clean_calibration):
        cal = clean_calibration
        assert projectively_equal(cal.l, clean_scene.true_l, tol=1e-6)
        assert projectively_equal(cal.v, clean_scene.true_v, tol=1e-6)
        assert projectively_equal(cal.b_r, clean_scene.true_b_r, tol=1e-6)
        m = measure_height(cal, clean_scene.true_b_r, clean_scene.true_t_r)
        assert m.Z_x == pytest.approx(box_ref.reference_height, rel=1e-6)

    def test_missing_ground_face(self, box_ref, clean_scene):
        corrs = {"front": clean_scene.correspondences["front"]}
        with pytest.raises(MissingFace):
            calibrate(box_ref, corrs, RansacConfig(seed=0))

    def test_missing_reference_face(self, box_ref, clean_scene):
        corrs = {"top": clean_scene.correspondences["top"]}
        with pytest.raises(MissingFace):
            calibrate(box_ref, corrs, RansacConfig(seed=0))

    def test_unknown_face_rejected(self, box_ref, clean_scene):
        corrs = dict(clean_scene.correspondences)
        corrs["lid"] = corrs["top"]
        with pytest.raises(ValidationError):
            calibrate(box_ref, corrs, RansacConfig(seed=0))

    def test_diagnostics_contents(self, clean_calibration):
        diag = clean_calibration.diagnostics
        assert set(diag["faces"]) == {"top", "front"}
        for stats in diag["faces"].values():
            assert stats["n_inliers"] == stats["n_correspondences"] == 25
            assert stats["mean_inlier_error_px"] < 1e-8
        assert diag["ground_face"] == "top"
        assert diag["reference_face"] == "front"
        assert diag["reference_pair_index"] in (0, 1)
        assert len(diag["reference_extra_line_residuals"]) == 2
        assert all(r < 1e-6 for r in diag["reference_extra_line_residuals"])
        assert diag["reference_alignment_shift_px"] < 1e-6

    def test_noisy_median_error_under_2mm(self, box_ref):
        errors = []
        for seed in range(100):
            scene = generate(
                SceneConfig(reference=box_ref, noise_sigma=0.5, seed=seed)
            )
            cal = calibrate(box_ref, scene.correspondences, RansacConfig(seed=seed))
            m = measure_height(cal, scene.true_b_r, scene.true_t_r)
            errors.append(abs(m.Z_x - box_ref.reference_height))
        assert float(np.median(errors)) < 2.0


class TestScaleInvariance:
    def test_composition_invariant_to_homogeneous_rescaling(self, clean_calibration, clean_scene):
        cal = clean_calibration
        obj = clean_scene.objects[0]
        baseline = measure_height(cal, obj.base_image, obj.top_image).Z_x
        rng = np.random.default_rng(23)
        for _ in range(100):
            scales = rng.uniform(-4, 4, 6)
            signs = rng.choice([-1.0, 1.0], 6)
            s = signs * 10.0**scales
            l2 = Homog3.from_vec(s[0] * cal.l.vec)
            v2 = Homog3.from_vec(s[1] * cal.v.vec)
            b_r2 = Homog3.from_vec(s[2] * cal.b_r.vec)
            t_r2 = Homog3.from_vec(s[3] * cal.t_r.vec)
            alpha2 = metric_factor(l2, v2, b_r2, t_r2, 100.0)
            cal2 = Calibration(l=l2, v=v2, b_r=b_r2, t_r=t_r2, alpha=alpha2)
            b_x2 = Homog3.from_vec(s[4] * obj.base_image.vec)
            t_x2 = Homog3.from_vec(s[5] * obj.top_image.vec)
            z = measure_height(cal2, b_x2, t_x2).Z_x
            assert z == pytest.approx(baseline, rel=1e-9)


class TestCalibrationSerialization:
    def test_round_trip_bit_exact(self, clean_calibration, tmp_path):
        path = tmp_path / "cal.json"
        save_calibration(clean_calibration, path)
        loaded = load_calibration(path)
        assert (loaded.l.vec == clean_calibration.l.vec).all()
        assert (loaded.v.vec == clean_calibration.v.vec).all()
        assert (loaded.b_r.vec == clean_calibration.b_r.vec).all()
        assert (loaded.t_r.vec == clean_calibration.t_r.vec).all()
        assert loaded.alpha == clean_calibration.alpha
        assert loaded.diagnostics == clean_calibration.diagnostics

    def test_dict_form_is_json_ready(self, clean_calibration):
        import json

        text = json.dumps(calibration_to_dict(clean_calibration), sort_keys=True)
        assert "alpha" in text
