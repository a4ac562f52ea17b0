# -*- coding: utf-8 -*-
"""
ca2n.dataio.synthetic
~~~~~~~~~~~~~~~~~~~~~

Procedural face photos and their edge sketches.

Every face is a skin-tone head ellipse on a plain background with two
eyes (white ellipse and iris), a nose and a mouth arc; geometry and
colours are jittered per sample and each landmark stays inside its
layout box. The sketch is a difference of Gaussians of the photo
luminance in one of three styles:

``dog``
    strokes where the normalised response falls below ``-threshold``
``line``
    the ``dog`` strokes thinned to one pixel
``xdog``
    grey-level strokes from a soft ``tanh`` threshold

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

import logging

import numpy as np
from scipy.ndimage import gaussian_filter, minimum_filter

from ..core.exceptions import ValidationError, require
from ..facelayout import ComponentId, default_layout
from ..utils.helpers import seeded_rng
from .dataset import DatasetManifest, PairedSample
from .netpbm import MAXVAL, quantize

logger = logging.getLogger(__name__)

SIGMA_FINE = 1.0
SIGMA_COARSE = 1.6
THRESHOLD = 0.08
XDOG_SHARPNESS = 10.0
STYLES = ("dog", "line", "xdog")

LUMA = np.array([0.299, 0.587, 0.114])

SKIN_TONES = np.array(
    [
        [0.96, 0.80, 0.69],
        [0.90, 0.72, 0.58],
        [0.78, 0.57, 0.44],
        [0.62, 0.44, 0.32],
        [0.45, 0.31, 0.22],
    ]
)
IRIS_COLOURS = np.array(
    [[0.25, 0.15, 0.08], [0.20, 0.35, 0.55], [0.25, 0.45, 0.25], [0.10, 0.10, 0.10]]
)


def _ellipse(yy, xx, cy, cx, ry, rx):
    return ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0


def _paint(photo, mask, colour):
    photo[:, mask] = np.asarray(colour)[:, None]


def _box_centre(box, rng, jitter=0.12):
    cx = box.x + box.w / 2.0 + rng.uniform(-jitter, jitter) * box.w
    cy = box.y + box.h / 2.0 + rng.uniform(-jitter, jitter) * box.h
    return cx, cy


def draw_face(rng, size, layout=None):
    """Draws one ``[3, S, S]`` face photo.

    :returns: ``(photo, landmarks)`` with landmark centres as ``(x, y)``.
    """
    layout = layout or default_layout(size)
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64) + 0.5
    background = rng.uniform(0.55, 0.95) * np.ones(3) + rng.uniform(-0.08, 0.08, 3)
    photo = np.empty((3, size, size))
    photo[:] = np.clip(background, 0, 1)[:, None, None]

    skin = SKIN_TONES[rng.integers(len(SKIN_TONES))] + rng.uniform(-0.04, 0.04, 3)
    head = (
        size * (0.5 + rng.uniform(-0.02, 0.02)),
        size * (0.52 + rng.uniform(-0.02, 0.02)),
    )
    _paint(
        photo,
        _ellipse(
            yy,
            xx,
            head[1],
            head[0],
            size * rng.uniform(0.42, 0.47),
            size * rng.uniform(0.34, 0.39),
        ),
        np.clip(skin, 0, 1),
    )
    landmarks = {"head": head}

    iris = IRIS_COLOURS[rng.integers(len(IRIS_COLOURS))]
    for component in (ComponentId.LEFT_EYE, ComponentId.RIGHT_EYE):
        box = layout[component]
        cx, cy = _box_centre(box, rng)
        rx = box.w * rng.uniform(0.3, 0.4)
        ry = box.h * rng.uniform(0.22, 0.32)
        _paint(photo, _ellipse(yy, xx, cy, cx, ry, rx), (0.97, 0.97, 0.95))
        radius = ry * rng.uniform(0.8, 1.0)
        _paint(photo, _ellipse(yy, xx, cy, cx, radius, radius), iris)
        _paint(
            photo, _ellipse(yy, xx, cy, cx, radius * 0.45, radius * 0.45), (0.02,) * 3
        )
        landmarks[component.value] = (cx, cy)

    shadow = np.clip(skin * rng.uniform(0.6, 0.75), 0, 1)
    box = layout[ComponentId.NOSE]
    cx, cy = _box_centre(box, rng)
    half_width = box.w * rng.uniform(0.18, 0.28)
    top, bottom = cy - box.h * 0.3, cy + box.h * 0.3
    height = bottom - top
    triangle = (yy >= top) & (yy <= bottom)
    triangle &= np.abs(xx - cx) <= half_width * (yy - top) / height
    _paint(photo, triangle, shadow)
    landmarks[ComponentId.NOSE.value] = (cx, cy)

    box = layout[ComponentId.MOUTH]
    cx, cy = _box_centre(box, rng)
    half_width = box.w * rng.uniform(0.3, 0.4)
    curve = box.h * rng.uniform(0.15, 0.3)
    thickness = max(1.0, box.h * rng.uniform(0.1, 0.16))
    lips = np.clip(np.array([0.72, 0.28, 0.30]) + rng.uniform(-0.08, 0.08, 3), 0, 1)
    u = (xx - cx) / half_width
    arc = cy - curve / 2.0 + curve * (1.0 - u ** 2)
    _paint(photo, (np.abs(u) <= 1.0) & (np.abs(yy - arc) <= thickness), lips)
    landmarks[ComponentId.MOUTH.value] = (cx, cy)

    return photo, landmarks


def dog_response(photo):
    """Difference of Gaussians of the photo luminance, scaled so its
    largest magnitude is 1."""
    luminance = np.tensordot(LUMA, photo, axes=(0, 0))
    response = gaussian_filter(luminance, SIGMA_FINE) - gaussian_filter(
        luminance, SIGMA_COARSE
    )
    peak = np.abs(response).max()
    return response / peak if peak > 0 else response


def sketch_from_photo(photo, style="dog", threshold=THRESHOLD):
    """Returns the ``[1, S, S]`` sketch of ``photo``; strokes are 1."""
    if style not in STYLES:
        raise ValidationError(
            "style",
            "unknown sketch style {!r}; one of {}".format(style, ", ".join(STYLES)),
        )
    response = dog_response(photo)
    strokes = response < -threshold
    if style == "dog":
        sketch = strokes.astype(np.float64)
    elif style == "line":
        ridge = (response <= minimum_filter(response, size=(1, 3))) | (
            response <= minimum_filter(response, size=(3, 1))
        )
        sketch = (strokes & ridge).astype(np.float64)
    else:
        depth = np.maximum(-response - threshold, 0.0)
        sketch = np.tanh(XDOG_SHARPNESS * depth)
    return sketch[None]


def _quantized(image):
    return quantize(image).astype(np.float64) / MAXVAL


def synth_faces(n, seed, size, style="dog"):
    """Generates ``n`` face photo/sketch pairs.

    Sample ``i`` depends only on ``seed`` and ``i``; pixel values are
    multiples of 1/255 so the pairs survive a round trip through files.
    """
    require(n >= 1, "n", "need at least one sample, got {}", n)
    layout = default_layout(size)
    samples = []
    for index in range(n):
        rng = seeded_rng(seed, "face", index)
        photo, landmarks = draw_face(rng, size, layout)
        photo = _quantized(photo)
        sketch = _quantized(sketch_from_photo(photo, style))
        samples.append(
            PairedSample("face_{:05d}".format(index), sketch, photo, landmarks)
        )
    logger.debug("Generated {} synthetic faces at {}x{}".format(n, size, size))
    return DatasetManifest(
        samples, size, provenance="synthetic seed={} style={}".format(seed, style)
    )


def restyle(manifest, style):
    """Returns ``manifest`` with every sketch redrawn from its photo in
    ``style``, for cross-style evaluation."""
    samples = [
        PairedSample(
            sample.id,
            _quantized(sketch_from_photo(sample.photo, style)),
            sample.photo,
            sample.landmarks,
        )
        for sample in manifest
    ]
    return DatasetManifest(
        samples,
        manifest.resolution,
        provenance="{} restyled as {}".format(manifest.provenance, style),
    )
