import json

import pytest

from svmeasure.errors import ParseError, ValidationError
from svmeasure.geometry import Homog3, normalize, projectively_equal
from svmeasure.reference import (
    bundled_reference,
    load_reference,
    reference_to_dict,
    save_reference,
    template_lines,
)


def box_dict():
    return reference_to_dict(bundled_reference("box_10cm"))


def write_spec(tmp_path, raw):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(raw))
    return path


class TestLoadReference:
    def test_bundled_box(self, box_ref):
        assert box_ref.name == "box_10cm"
        assert len(box_ref.faces) == 2
        assert box_ref.reference_height == 100.0
        roles = {f.role for f in box_ref.faces}
        assert roles == {"ground_plane_face", "reference_direction_face"}

    def test_round_trip(self, tmp_path, box_ref):
        path = tmp_path / "box.json"
        save_reference(box_ref, path)
        assert load_reference(path) == box_ref

    def test_anchor_distance_mismatch(self, tmp_path):
        raw = box_dict()
        raw["top_anchor"] = [50.0, 99.0]
        with pytest.raises(ValidationError, match="anchor distance"):
            load_reference(write_spec(tmp_path, raw))

    def test_non_parallel_declared_pair(self, tmp_path):
        raw = box_dict()
        # tilt one segment of a declared pair by about 1 degree
        raw["faces"][0]["line_pairs"][0][1] = [0.0, 80.0, 100.0, 81.75]
        with pytest.raises(ValidationError, match="parallel"):
            load_reference(write_spec(tmp_path, raw))

    def test_endpoint_outside_template(self, tmp_path):
        raw = box_dict()
        raw["faces"][0]["line_pairs"][0][0] = [0.0, 20.0, 140.0, 20.0]
        with pytest.raises(ValidationError, match="outside"):
            load_reference(write_spec(tmp_path, raw))

    def test_missing_role(self, tmp_path):
        raw = box_dict()
        raw["faces"][1]["role"] = "ground_plane_face"
        raw["faces"][1]["line_pairs"] = raw["faces"][0]["line_pairs"]
        with pytest.raises(ValidationError, match="reference_direction_face"):
            load_reference(write_spec(tmp_path, raw))

    def test_ground_face_needs_two_directions(self, tmp_path):
        raw = box_dict()
        raw["faces"][0]["line_pairs"] = [
            [[0.0, 20.0, 100.0, 20.0], [0.0, 80.0, 100.0, 80.0]],
            [[0.0, 40.0, 100.0, 40.0], [0.0, 60.0, 100.0, 60.0]],
        ]
        with pytest.raises(ValidationError, match="parallel"):
            load_reference(write_spec(tmp_path, raw))

    def test_reference_face_needs_aligned_pair(self, tmp_path):
        raw = box_dict()
        raw["faces"][1]["line_pairs"] = [
            [[0.0, 20.0, 100.0, 20.0], [0.0, 80.0, 100.0, 80.0]]
        ]
        with pytest.raises(ValidationError, match="aligned"):
            load_reference(write_spec(tmp_path, raw))

    def test_anchor_not_vertical(self, tmp_path):
        raw = box_dict()
        raw["base_anchor"] = [40.0, 0.0]
        raw["top_anchor"] = [50.0, 99.498743710662]
        with pytest.raises(ValidationError, match="\\+y direction"):
            load_reference(write_spec(tmp_path, raw))

    def test_base_anchor_off_ground_edge(self, tmp_path):
        raw = box_dict()
        raw["base_anchor"] = [50.0, 10.0]
        raw["top_anchor"] = [50.0, 110.0]
        raw["faces"][1]["height_mm"] = 120.0
        with pytest.raises(ValidationError, match="bottom edge"):
            load_reference(write_spec(tmp_path, raw))

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "spec.json"
        path.write_text("{not json")
        with pytest.raises(ParseError):
            load_reference(path)

    def test_missing_key(self, tmp_path):
        raw = box_dict()
        del raw["reference_height_mm"]
        with pytest.raises(ParseError):
            load_reference(write_spec(tmp_path, raw))

    def test_unknown_bundled_name(self):
        with pytest.raises(ParseError):
            bundled_reference("no_such_object")


class TestTemplateLines:
    def test_vertical_segment_is_y_axis(self, box_ref):
        face = box_ref.anchor_face
        # segment (0,0)-(0,100) supports the line x = 0, i.e. (1,0,0)
        from svmeasure.geometry import cross

        line = cross(Homog3.point(0, 0), Homog3.point(0, 100))
        assert projectively_equal(line, Homog3(1, 0, 0))

    def test_horizontal_pair_meets_at_ideal_point(self, box_ref):
        ground = box_ref.faces_with_role("ground_plane_face")[0]
        pairs = template_lines(ground)
        la, lb = pairs[0]
        from svmeasure.geometry import cross

        vp = normalize(cross(la, lb))
        assert projectively_equal(vp, Homog3(1, 0, 0))

    def test_every_pair_meets_at_infinity(self, box_ref):
        from svmeasure.geometry import cross

        for face in box_ref.faces:
            for la, lb in template_lines(face):
                import numpy as np

                meet = np.cross(la.vec, lb.vec)
                meet = meet / np.linalg.norm(meet)
                assert abs(meet[2]) < 1e-9
