"""Single-photo length measurement against a known reference object."""

from .errors import MeasureError
from .geometry import Homog3, cross, incidence_residual, normalize, project_onto_line
from .homography import (
    Correspondence,
    EstimateReport,
    Homography,
    RansacConfig,
    apply_point,
    estimate_dlt,
    map_line,
    ransac_homography,
    read_correspondences_csv,
    transfer_error,
    write_correspondences_csv,
)
from .metrology import (
    Calibration,
    Measurement,
    align_input,
    calibrate,
    load_calibration,
    measure_height,
    metric_factor,
    save_calibration,
    vanishing_line_of_plane,
    vanishing_point_of_pair,
)
from .reference import (
    FaceTemplate,
    ReferenceObject,
    bundled_reference,
    load_reference,
    save_reference,
    template_lines,
)
from .synthetic import Camera, SceneConfig, SyntheticScene, generate, project

__version__ = "0.1.0"

__all__ = [
    "Calibration",
    "Camera",
    "Correspondence",
    "EstimateReport",
    "FaceTemplate",
    "Homog3",
    "Homography",
    "MeasureError",
    "Measurement",
    "RansacConfig",
    "ReferenceObject",
    "SceneConfig",
    "SyntheticScene",
    "align_input",
    "apply_point",
    "bundled_reference",
    "calibrate",
    "cross",
    "estimate_dlt",
    "generate",
    "incidence_residual",
    "load_calibration",
    "load_reference",
    "map_line",
    "measure_height",
    "metric_factor",
    "normalize",
    "project",
    "project_onto_line",
    "ransac_homography",
    "read_correspondences_csv",
    "save_calibration",
    "save_reference",
    "template_lines",
    "transfer_error",
    "vanishing_line_of_plane",
    "vanishing_point_of_pair",
    "write_correspondences_csv",
]
