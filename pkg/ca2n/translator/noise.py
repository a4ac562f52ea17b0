# -*- coding: utf-8 -*-
"""
ca2n.translator.noise
~~~~~~~~~~~~~~~~~~~~~

Uniform noise induction on generated images.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

import attr
import numpy as np

from ..numerics import Tensor, ops
from ..utils.helpers import seeded_rng

MAX_EPSILON = 0.25


def _check_epsilon(instance, attribute, value):
    if not 0 <= value <= MAX_EPSILON:
        raise ValueError(
            "epsilon must be in [0, {}], got {}".format(MAX_EPSILON, value)
        )


@attr.s(frozen=True)
class NoiseConfig(object):
    epsilon = attr.ib(default=0.05, converter=float, validator=_check_epsilon)
    seed = attr.ib(default=0)
    distribution = attr.ib(
        default="uniform", validator=attr.validators.in_(("uniform",))
    )


class NoiseSource(object):
    """Draws ``N ~ U(-1, 1)`` from a stream seeded by the noise config and
    keeps the most recent draw in :attr:`last_draw`."""

    def __init__(self, config):
        self.config = config
        self.last_draw = None
        self._rng = seeded_rng(config.seed, "noise")

    @property
    def epsilon(self):
        return self.config.epsilon

    def draw(self, shape):
        self.last_draw = self._rng.uniform(-1.0, 1.0, size=shape)
        return self.last_draw


def perturb(image, noise):
    """Returns ``clamp(image + epsilon * N, 0, 1)`` for a fresh draw of
    ``noise``. The draw is a constant of the graph."""
    draw = noise.draw(image.shape)
    offset = Tensor(noise.epsilon * draw, dtype=image.dtype)
    return ops.clamp(ops.add(image, offset), 0.0, 1.0)


class FixedNoise(object):
    """Replays one stored draw, broadcast to the requested shape.

    Repeated evaluations of the induced loss then see the same noise,
    which finite-difference checks rely on.
    """

    def __init__(self, draw, epsilon=0.05):
        self.last_draw = np.asarray(draw)
        self.config = NoiseConfig(epsilon)

    @property
    def epsilon(self):
        return self.config.epsilon

    def draw(self, shape):
        return np.broadcast_to(self.last_draw, shape)
