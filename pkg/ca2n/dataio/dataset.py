# -*- coding: utf-8 -*-
"""
ca2n.dataio.dataset
~~~~~~~~~~~~~~~~~~~

Paired sketch/photo samples, directory ingestion and the train/test
split.

A dataset directory holds ``<id>_sketch.pgm`` and ``<id>_photo.ppm``
files. Samples are always ordered lexicographically by id.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

import logging
import os

import attr
import numpy as np

from ..core.exceptions import ConfigurationError, DecodeError, require
from ..utils.helpers import ensure_dir, seeded_rng
from .netpbm import read_image, write_image

logger = logging.getLogger(__name__)

SKETCH_SUFFIX = "_sketch.pgm"
PHOTO_SUFFIX = "_photo.ppm"
INDEX_FILE = "manifest.txt"


@attr.s(eq=False)
class PairedSample(object):
    id = attr.ib()
    #: ``[1, S, S]``, bright strokes on a dark ground
    sketch = attr.ib(repr=False)
    #: ``[3, S, S]``
    photo = attr.ib(repr=False)
    #: ``{name: (x, y)}`` landmark centres of synthetic faces
    landmarks = attr.ib(factory=dict, repr=False)


@attr.s
class DatasetManifest(object):
    samples = attr.ib(converter=lambda s: sorted(s, key=lambda sample: sample.id))
    resolution = attr.ib()
    provenance = attr.ib(default="")
    warnings = attr.ib(factory=list)

    @samples.validator
    def _unique_ids(self, attribute, value):
        ids = [sample.id for sample in value]
        require(len(set(ids)) == len(ids), "samples", "sample ids must be unique")

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    @property
    def ids(self):
        return [sample.id for sample in self.samples]

    def sketches(self):
        """Returns the ``[N, 1, S, S]`` sketch stack."""
        return np.stack([sample.sketch for sample in self.samples])

    def photos(self):
        """Returns the ``[N, 3, S, S]`` photo stack."""
        return np.stack([sample.photo for sample in self.samples])

    def subset(self, ids, provenance=None):
        wanted = set(ids)
        return DatasetManifest(
            [s for s in self.samples if s.id in wanted],
            self.resolution,
            provenance if provenance is not None else self.provenance,
        )

    def write_index(self, path):
        """Writes the ids, one per line."""
        with open(path, "w", encoding="utf-8") as fh:
            for sample_id in self.ids:
                fh.write(sample_id + "\n")


def save_dataset(manifest, directory):
    """Writes every sample as a sketch/photo file pair plus the index."""
    ensure_dir(directory)
    for sample in manifest:
        sketch_path = os.path.join(directory, sample.id + SKETCH_SUFFIX)
        write_image(sample.sketch, sketch_path, sketch=True)
        write_image(sample.photo, os.path.join(directory, sample.id + PHOTO_SUFFIX))
    manifest.write_index(os.path.join(directory, INDEX_FILE))
    logger.info("Wrote {} pairs to {}".format(len(manifest), directory))


def _summary(names):
    shown = ", ".join(names[:5])
    if len(names) > 5:
        shown += ", ... ({} more)".format(len(names) - 5)
    return shown or "no files"


def load_dataset(directory, size):
    """Loads all ``<id>_sketch.pgm`` / ``<id>_photo.ppm`` pairs of
    ``directory`` at resolution ``size``.

    Unpaired files and files that fail to decode or have the wrong
    resolution are skipped and listed in ``manifest.warnings``.

    :raises ConfigurationError: if no pair could be loaded.
    """
    try:
        names = sorted(os.listdir(directory))
    except OSError as exc:
        raise ConfigurationError(
            "cannot list data directory {}: {}".format(directory, exc)
        )

    sketches = {n[: -len(SKETCH_SUFFIX)] for n in names if n.endswith(SKETCH_SUFFIX)}
    photos = {n[: -len(PHOTO_SUFFIX)] for n in names if n.endswith(PHOTO_SUFFIX)}
    warnings = []
    for stem in sorted(sketches ^ photos):
        orphan = stem + (SKETCH_SUFFIX if stem in sketches else PHOTO_SUFFIX)
        warnings.append("unpaired file {}".format(orphan))

    samples = []
    for stem in sorted(sketches & photos):
        try:
            sketch = read_image(os.path.join(directory, stem + SKETCH_SUFFIX), "sketch")
            photo = read_image(os.path.join(directory, stem + PHOTO_SUFFIX), "photo")
        except (OSError, DecodeError) as exc:
            warnings.append("skipped {}: {}".format(stem, exc))
            continue
        bad = [
            kind
            for kind, image in (("sketch", sketch), ("photo", photo))
            if image.shape[1:] != (size, size)
        ]
        if bad:
            warnings.append(
                "skipped {}: {} not at resolution {}x{}".format(
                    stem, " and ".join(bad), size, size
                )
            )
            continue
        samples.append(PairedSample(stem, sketch, photo))

    for warning in warnings:
        logger.warning("{}: {}".format(directory, warning))
    if not samples:
        raise ConfigurationError(
            "no usable sketch/photo pairs at {}x{} in {} ({} files: {})".format(
                size, size, directory, len(names), _summary(names)
            )
        )
    return DatasetManifest(samples, size, provenance=directory, warnings=warnings)


def split_sizes(total, ratio):
    """Returns ``(train, test)`` sizes; the test part is
    ``floor(total / (a + b)) * b`` for a ratio ``a:b``."""
    train_part, test_part = ratio
    require(
        train_part > 0 and test_part > 0,
        "ratio",
        "ratio parts must be positive, got {}:{}",
        train_part,
        test_part,
    )
    test = (total // (train_part + test_part)) * test_part
    return total - test, test


def split_train_test(manifest, ratio=(10, 1), seed=0):
    """Splits ``manifest`` by a seeded shuffle of its ids.

    :returns: ``(train manifest, test manifest)``, both ordered by id.
    """
    require(len(manifest) > 0, "manifest", "cannot split an empty dataset")
    _, test_size = split_sizes(len(manifest), ratio)
    order = seeded_rng(seed, "split").permutation(len(manifest))
    ids = manifest.ids
    test_ids = [ids[i] for i in order[:test_size]]
    train_ids = [ids[i] for i in order[test_size:]]

    train = manifest.subset(train_ids)
    test = manifest.subset(test_ids)
    if test_size == 0:
        message = "test split is empty: {} samples at {}:{}".format(
            len(manifest), ratio[0], ratio[1]
        )
        logger.warning(message)
        train.warnings.append(message)
    return train, test
