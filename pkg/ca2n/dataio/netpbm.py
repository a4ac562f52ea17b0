# -*- coding: utf-8 -*-
"""
ca2n.dataio.netpbm
~~~~~~~~~~~~~~~~~~

Binary PGM (P5) and PPM (P6) reading and writing with maxval 255.

Images are channel-first float arrays in ``[0, 1]``; byte ``p`` maps to
``p / 255``. Sketches are held with bright strokes on a dark ground and
stored inverted, as dark strokes on white.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

import logging
import os

import numpy as np
from PIL import Image

from ..core.exceptions import DecodeError, ValidationError

logger = logging.getLogger(__name__)

MAXVAL = 255
WHITESPACE = b" \t\n\r\v\f"
MAGIC_CHANNELS = {b"P5": 1, b"P6": 3}
EXPECTED_MAGIC = {"sketch": b"P5", "photo": b"P6"}


class _HeaderReader(object):
    def __init__(self, path, data):
        self.path = path
        self.data = data
        self.pos = 0

    def fail(self, reason, offset=None):
        raise DecodeError(self.path, self.pos if offset is None else offset, reason)

    def skip_whitespace(self):
        data = self.data
        while self.pos < len(data):
            byte = data[self.pos:self.pos + 1]
            if byte == b"#":
                end = data.find(b"\n", self.pos)
                self.pos = len(data) if end < 0 else end + 1
            elif byte in WHITESPACE:
                self.pos += 1
            else:
                break

    def integer(self, what):
        self.skip_whitespace()
        start = self.pos
        while self.pos < len(self.data) and self.data[self.pos:self.pos + 1].isdigit():
            self.pos += 1
        if start == self.pos:
            self.fail("expected {}".format(what))
        return int(self.data[start:self.pos])


def decode(data, path="<bytes>", expect=None):
    """Decodes netpbm bytes into a ``[C, H, W]`` array of raw byte
    values scaled to ``[0, 1]`` (no sketch inversion)."""
    reader = _HeaderReader(path, data)
    magic = data[:2]
    if magic not in MAGIC_CHANNELS:
        reader.fail("unsupported magic {!r}, expected P5 or P6".format(magic))
    if expect is not None and magic != EXPECTED_MAGIC[expect]:
        reader.fail(
            "magic {} is not a {} ({} expected)".format(
                magic.decode("ascii"), expect, EXPECTED_MAGIC[expect].decode("ascii")
            )
        )
    reader.pos = 2
    if reader.pos >= len(data) or data[2:3] not in WHITESPACE + b"#":
        reader.fail("expected whitespace after the magic")
    width = reader.integer("width")
    height = reader.integer("height")
    maxval_offset = reader.pos
    maxval = reader.integer("maxval")
    if maxval != MAXVAL:
        reader.fail(
            "maxval {} is not supported, expected {}".format(maxval, MAXVAL),
            offset=maxval_offset,
        )
    if width < 1 or height < 1:
        reader.fail("empty image {}x{}".format(width, height), offset=2)
    if reader.pos >= len(data) or data[reader.pos:reader.pos + 1] not in WHITESPACE:
        reader.fail("expected a single whitespace before the pixel data")
    reader.pos += 1

    channels = MAGIC_CHANNELS[magic]
    size = width * height * channels
    payload = data[reader.pos:reader.pos + size]
    if len(payload) < size:
        reader.fail(
            "truncated pixel data: {} of {} bytes".format(len(payload), size),
            offset=reader.pos + len(payload),
        )
    if len(data) > reader.pos + size:
        logger.debug(
            "{}: ignoring {} trailing bytes".format(path, len(data) - reader.pos - size)
        )
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, channels)
    return pixels.transpose(2, 0, 1).astype(np.float64) / MAXVAL


def read_image(path, expect=None):
    """Reads a P5 or P6 file.

    :param expect: ``"sketch"`` requires P5 and inverts to bright strokes,
        ``"photo"`` requires P6; ``None`` accepts both as stored.
    :returns: ``[C, H, W]`` float array in ``[0, 1]``.
    :raises DecodeError: for malformed files, with the byte offset.
    """
    if expect not in (None, "sketch", "photo"):
        raise ValidationError("expect", "unknown image kind {!r}".format(expect))
    with open(path, "rb") as fh:
        data = fh.read()
    image = decode(data, path=path, expect=expect)
    if expect == "sketch":
        image = 1.0 - image
    return image


def quantize(image):
    """Maps ``[0, 1]`` values to bytes, rounding half away from zero
    after clamping."""
    scaled = np.clip(np.asarray(image, dtype=np.float64), 0.0, 1.0) * MAXVAL
    return np.floor(scaled + 0.5).astype(np.uint8)


def encode(image):
    """Encodes a ``[1, H, W]``/``[H, W]`` (P5) or ``[3, H, W]`` (P6)
    image."""
    image = np.asarray(image)
    if image.ndim == 2:
        image = image[None]
    if image.ndim != 3 or image.shape[0] not in (1, 3):
        raise ValidationError(
            "image", "expected [1, H, W] or [3, H, W], got {}".format(image.shape)
        )
    channels, height, width = image.shape
    magic = b"P5" if channels == 1 else b"P6"
    header = magic + b"\n" + "{} {}\n{}\n".format(width, height, MAXVAL).encode("ascii")
    return header + quantize(image).transpose(1, 2, 0).tobytes()


def write_image(image, path, sketch=False):
    """Writes ``image`` as P5 or P6 depending on its channel count.
    Sketches are inverted to dark strokes on white."""
    image = np.asarray(image, dtype=np.float64)
    if sketch:
        image = 1.0 - image
    data = encode(image)
    with open(path, "wb") as fh:
        fh.write(data)


def export_image(image, path, sketch=False):
    """Writes ``image`` to ``path``; ``.pgm``/``.ppm``/``.pnm`` stay in
    netpbm, other suffixes (``.png``, ``.jpg``, ...) go through Pillow."""
    suffix = os.path.splitext(path)[1].lower()
    if suffix in (".pgm", ".ppm", ".pnm"):
        return write_image(image, path, sketch=sketch)

    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 2:
        image = image[None]
    if sketch:
        image = 1.0 - image
    pixels = np.ascontiguousarray(quantize(image).transpose(1, 2, 0))
    if pixels.shape[2] == 1:
        pil_image = Image.fromarray(pixels[:, :, 0])
    else:
        pil_image = Image.fromarray(pixels)
    try:
        pil_image.save(path)
    except (KeyError, ValueError) as exc:
        raise ValidationError("path", "cannot export to {}: {}".format(path, exc))
