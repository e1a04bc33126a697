import pytest

from svmeasure.homography import RansacConfig
from svmeasure.metrology import calibrate
from svmeasure.reference import bundled_reference
from svmeasure.synthetic import SceneConfig, generate


@pytest.fixture(scope="session")
def box_ref():
    return bundled_reference("box_10cm")


@pytest.fixture(scope="session")
def clean_scene(box_ref):
    """One seeded noise-free scene shared across tests."""
    return generate(SceneConfig(reference=box_ref, seed=11))


@pytest.fixture(scope="session")
def clean_calibration(box_ref, clean_scene):
    return calibrate(box_ref, clean_scene.correspondences, RansacConfig(seed=11))
