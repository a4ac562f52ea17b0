import numpy as np
import pytest

from ca2n.core.exceptions import ValidationError
from ca2n.dataio import restyle, synth_faces
from ca2n.dataio.synthetic import STYLES, dog_response, sketch_from_photo
from ca2n.facelayout import ComponentId, default_layout


def test_shapes_and_ids():
    manifest = synth_faces(3, seed=1, size=32)

    assert manifest.ids == ["face_00000", "face_00001", "face_00002"]
    assert manifest.resolution == 32
    assert manifest.sketches().shape == (3, 1, 32, 32)
    assert manifest.photos().shape == (3, 3, 32, 32)
    assert "seed=1" in manifest.provenance


def test_deterministic_per_seed_and_index():
    first = synth_faces(2, seed=7, size=32)
    second = synth_faces(4, seed=7, size=32)
    other = synth_faces(2, seed=8, size=32)

    np.testing.assert_array_equal(first.photos(), second.photos()[:2])
    np.testing.assert_array_equal(first.sketches(), second.sketches()[:2])
    assert not np.array_equal(first.photos(), other.photos())


def test_pixels_are_byte_values(tiny_dataset):
    for images in (tiny_dataset.photos(), tiny_dataset.sketches()):
        assert images.min() >= 0 and images.max() <= 1
        scaled = images * 255
        np.testing.assert_allclose(scaled, np.round(scaled), atol=1e-9)


def test_landmarks_stay_in_their_boxes(tiny_dataset):
    layout = default_layout(32)
    for sample in tiny_dataset:
        for component in (
            ComponentId.LEFT_EYE,
            ComponentId.RIGHT_EYE,
            ComponentId.NOSE,
            ComponentId.MOUTH,
        ):
            box = layout[component]
            x, y = sample.landmarks[component.value]
            assert box.x <= x <= box.x + box.w
            assert box.y <= y <= box.y + box.h


def test_faces_have_strokes(tiny_dataset):
    for sample in tiny_dataset:
        assert 0 < sample.sketch.mean() < 0.5


def test_dog_response_is_normalised(tiny_dataset):
    response = dog_response(tiny_dataset.photos()[0])

    assert response.shape == (32, 32)
    assert np.abs(response).max() == pytest.approx(1.0)


def test_dog_response_of_blank_image():
    np.testing.assert_array_equal(dog_response(np.zeros((3, 8, 8))), 0.0)


def test_styles(tiny_dataset):
    photo = tiny_dataset.photos()[1]
    dog = sketch_from_photo(photo, "dog")
    line = sketch_from_photo(photo, "line")
    xdog = sketch_from_photo(photo, "xdog")

    assert set(np.unique(dog)) <= {0.0, 1.0}
    assert np.all(line <= dog)
    assert line.sum() > 0
    assert xdog.min() >= 0 and xdog.max() < 1
    assert np.array_equal(xdog > 0, dog > 0)


def test_unknown_style():
    with pytest.raises(ValidationError) as excinfo:
        sketch_from_photo(np.zeros((3, 8, 8)), "charcoal")
    for style in STYLES:
        assert style in str(excinfo.value)


def test_needs_a_sample():
    with pytest.raises(ValidationError):
        synth_faces(0, seed=1, size=32)


def test_restyle(tiny_dataset):
    restyled = restyle(tiny_dataset, "xdog")

    assert restyled.ids == tiny_dataset.ids
    np.testing.assert_array_equal(restyled.photos(), tiny_dataset.photos())
    assert not np.array_equal(restyled.sketches(), tiny_dataset.sketches())
    assert restyled.provenance.endswith("restyled as xdog")
