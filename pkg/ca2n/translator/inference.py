# -*- coding: utf-8 -*-
"""
ca2n.translator.inference
~~~~~~~~~~~~~~~~~~~~~~~~~

The sketch to photo pipeline: split, encode, map, assemble, generate and
enhance.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

import logging

import numpy as np

from ..core.exceptions import require
from ..facelayout import ComponentId, split
from ..numerics import Tensor
from .mapping import assemble, map_features

logger = logging.getLogger(__name__)


class Pipeline(object):
    """Bundles everything needed to turn sketches into photos.

    :param layout: The :class:`ca2n.facelayout.ComponentLayout`.
    :param encoders: Component encoders keyed by :class:`ComponentId`.
    :param mappers: The :class:`ca2n.translator.mapping.MapperSet`.
    :param generator: The :class:`ca2n.translator.networks.Generator`.
    :param hook: Optional :class:`ca2n.translator.enhance.EnhancementHook`.
    """

    def __init__(self, layout, encoders, mappers, generator, hook=None):
        self.layout = layout
        self.encoders = encoders
        self.mappers = mappers
        self.generator = generator
        self.hook = hook

    @classmethod
    def from_models(cls, models, layout, hook=None):
        return cls(layout, models.encoders, models.mappers, models.generator, hook)

    def translate(self, sketch):
        """Differentiable forward pass from a ``[N, 1, S, S]`` sketch
        tensor to a ``[N, 3, S, S]`` image tensor."""
        size = self.layout.size
        require(
            sketch.ndim == 4 and sketch.shape[1:] == (1, size, size),
            "sketch",
            "expected [N, 1, {0}, {0}] sketches, got {1}",
            size,
            sketch.shape,
        )
        patches = split(sketch, self.layout)
        maps = {
            component: map_features(
                self.encoders[component](patches[component]), component, self.mappers
            )
            for component in ComponentId
        }
        return self.generator(assemble(maps, self.layout))

    def generate(self, sketch):
        """Returns the generator output for ``sketch`` (``[1, S, S]`` or
        ``[N, 1, S, S]`` array) without enhancement."""
        sketch = np.asarray(sketch)
        single = sketch.ndim == 3
        batch = sketch[None] if single else sketch
        image = self.translate(Tensor(batch)).numpy()
        return image[0] if single else image

    def enhance(self, image):
        if self.hook is None:
            return np.array(image, copy=True)
        return self.hook(image)

    def infer(self, sketch):
        """Generates and enhances; see :meth:`generate`."""
        return self.enhance(self.generate(sketch))


def infer(sketch, layout, models, hook=None):
    """Runs the whole pipeline on ``sketch`` with the stage 2 ``models``."""
    return Pipeline.from_models(models, layout, hook).infer(sketch)
