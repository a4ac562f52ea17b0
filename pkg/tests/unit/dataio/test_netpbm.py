import numpy as np
import pytest
from PIL import Image

from ca2n.core.exceptions import DecodeError, ValidationError
from ca2n.dataio.netpbm import (
    decode,
    encode,
    export_image,
    quantize,
    read_image,
    write_image,
)


def test_decode_grey():
    image = decode(b"P5\n2 1\n255\n\x00\xff")

    assert image.shape == (1, 1, 2)
    np.testing.assert_array_equal(image, [[[0.0, 1.0]]])


def test_decode_skips_comments():
    image = decode(b"P6\n# made by hand\n1 1 # one pixel\n255\n\x00\x33\xff")

    np.testing.assert_allclose(image[:, 0, 0], [0.0, 0.2, 1.0])


def test_decode_bad_magic():
    with pytest.raises(DecodeError) as excinfo:
        decode(b"P7\n1 1\n255\n\x00", path="face.pgm")

    assert excinfo.value.offset == 0
    assert excinfo.value.path == "face.pgm"
    assert "face.pgm at byte 0" in str(excinfo.value)


def test_decode_unsupported_maxval():
    with pytest.raises(DecodeError) as excinfo:
        decode(b"P5\n2 2\n65535\n" + b"\x00" * 8)

    assert excinfo.value.offset == 6
    assert "maxval 65535" in excinfo.value.reason


def test_decode_missing_width():
    with pytest.raises(DecodeError) as excinfo:
        decode(b"P5\nx")

    assert excinfo.value.offset == 3
    assert excinfo.value.reason == "expected width"


def test_decode_truncated():
    with pytest.raises(DecodeError) as excinfo:
        decode(b"P5\n2 2\n255\n\x01\x02\x03")

    assert excinfo.value.offset == 14
    assert "3 of 4 bytes" in excinfo.value.reason


def test_decode_expected_kind():
    with pytest.raises(DecodeError) as excinfo:
        decode(b"P6\n1 1\n255\n\x00\x00\x00", expect="sketch")

    assert excinfo.value.offset == 0
    assert "P5 expected" in excinfo.value.reason


def test_quantize():
    np.testing.assert_array_equal(
        quantize(np.array([-0.2, 0.0, 0.5, 1.0, 1.3])), [0, 0, 128, 255, 255]
    )


def test_encode_header():
    data = encode(np.zeros((3, 2, 4)))

    assert data.startswith(b"P6\n4 2\n255\n")
    assert len(data) == len(b"P6\n4 2\n255\n") + 24
    assert encode(np.ones((5, 5))).startswith(b"P5\n")


def test_encode_rejects_other_channel_counts():
    with pytest.raises(ValidationError):
        encode(np.zeros((2, 4, 4)))


def test_photo_file(tmp_path, rng):
    photo = quantize(rng.uniform(size=(3, 8, 6))) / 255.0
    path = str(tmp_path / "photo.ppm")

    write_image(photo, path)

    np.testing.assert_array_equal(read_image(path, expect="photo"), photo)


def test_sketch_is_stored_inverted(tmp_path):
    sketch = np.zeros((1, 4, 4))
    sketch[0, 1, :] = 1.0
    path = str(tmp_path / "sketch.pgm")

    write_image(sketch, path, sketch=True)

    with open(path, "rb") as fh:
        stored = decode(fh.read())
    np.testing.assert_array_equal(stored, 1.0 - sketch)
    np.testing.assert_array_equal(read_image(path, expect="sketch"), sketch)


def test_read_image_unknown_kind(tmp_path):
    with pytest.raises(ValidationError):
        read_image(str(tmp_path / "x.pgm"), expect="depth")


def test_export_png(tmp_path):
    photo = np.zeros((3, 4, 5))
    photo[0] = 1.0
    path = str(tmp_path / "out.png")

    export_image(photo, path)

    with Image.open(path) as image:
        assert image.size == (5, 4)
        assert image.mode == "RGB"
        assert image.getpixel((0, 0)) == (255, 0, 0)


def test_export_sketch_png(tmp_path):
    path = str(tmp_path / "sketch.png")

    export_image(np.ones((1, 3, 3)), path, sketch=True)

    with Image.open(path) as image:
        assert image.mode == "L"
        assert image.getpixel((1, 1)) == 0


def test_export_netpbm_suffix(tmp_path):
    path = str(tmp_path / "out.ppm")

    export_image(np.full((3, 2, 2), 0.2), path)

    np.testing.assert_allclose(read_image(path), 0.2, atol=1 / 255.0)


def test_export_unknown_suffix(tmp_path):
    with pytest.raises(ValidationError):
        export_image(np.zeros((3, 2, 2)), str(tmp_path / "out.unknownformat"))
