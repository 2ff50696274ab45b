import math

import numpy as np
import pytest

from tomouq import GeometryError, ProjectionGeometry, default_padded_size, geometry_for_image
from tomouq.geometry import normalized_pixel_centers, pixel_centers


def test_padded_size_covers_diagonal():
    for side in (1, 16, 100, 128, 256, 257):
        padded = default_padded_size(side, side)
        assert padded >= math.ceil(math.sqrt(2.0) * side)
        # parity matched so detector offsets align with pixel centers
        assert (padded - side) % 2 == 0


def test_geometry_invariants():
    with pytest.raises(GeometryError):
        ProjectionGeometry(n_views=0, n_detectors=4, padded_size=4)
    with pytest.raises(GeometryError):
        ProjectionGeometry(n_views=4, n_detectors=0, padded_size=4)
    with pytest.raises(GeometryError):
        ProjectionGeometry(n_views=4, n_detectors=4, detector_spacing=0.0, padded_size=4)


def test_angles_evenly_spaced_from_zero():
    geom = geometry_for_image(16, 16, n_views=8)
    assert geom.angles[0] == 0.0
    assert np.allclose(np.diff(geom.angles), np.pi / 8)
    assert geom.angles[-1] < np.pi


def test_detector_offsets_centered():
    geom = ProjectionGeometry(n_views=1, n_detectors=5, detector_spacing=2.0, padded_size=5)
    assert np.allclose(geom.detector_offsets, [-4, -2, 0, 2, 4])
    even = ProjectionGeometry(n_views=1, n_detectors=4, padded_size=4)
    assert np.allclose(even.detector_offsets, [-1.5, -0.5, 0.5, 1.5])


def test_image_exceeding_padded_frame_rejected():
    geom = ProjectionGeometry(n_views=4, n_detectors=24, padded_size=24)
    geom.validate_for_image((16, 16))
    with pytest.raises(GeometryError):
        geom.validate_for_image((32, 32))
    with pytest.raises(GeometryError):
        # frame smaller than the grid diagonal
        ProjectionGeometry(n_views=4, n_detectors=17, padded_size=17).validate_for_image((16, 16))


def test_pixel_centers_centered_and_y_up():
    px, py = pixel_centers((2, 3))
    assert np.allclose(px.reshape(2, 3)[0], [-1, 0, 1])
    assert np.allclose(py.reshape(2, 3)[:, 0], [0.5, -0.5])


def test_normalized_centers_in_unit_square():
    coords = normalized_pixel_centers((4, 4))
    assert coords.shape == (16, 2)
    assert coords.min() > 0.0 and coords.max() < 1.0
    assert np.allclose(coords[0], [0.125, 0.125])
