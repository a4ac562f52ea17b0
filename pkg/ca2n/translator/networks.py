# -*- coding: utf-8 -*-
"""
ca2n.translator.networks
~~~~~~~~~~~~~~~~~~~~~~~~

The generator turning assembled feature maps into colour images and the
discriminator scoring them.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

import logging

from ..core.exceptions import require
from ..numerics import Conv2d, ConvTranspose2d, Linear, Module, ModuleList, ops

logger = logging.getLogger(__name__)

KERNEL = 3


class ResidualBlock(Module):
    def __init__(self, channels, rng, slope=0.2):
        self.conv1 = Conv2d(channels, channels, KERNEL, rng, padding=1)
        self.conv2 = Conv2d(channels, channels, KERNEL, rng, padding=1)
        self._slope = slope

    def forward(self, x):
        return ops.add(x, self.conv2(ops.leaky_relu(self.conv1(x), self._slope)))


class Generator(Module):
    """Encoder-decoder from a ``[N, F, S, S]`` feature stack to a
    ``[N, 3, S, S]`` image in (0, 1).

    Three stride-2 down blocks, ``residual_blocks`` residual blocks at the
    bottleneck and three transposed up blocks that retrace the down
    sampled shapes exactly.
    """

    def __init__(
        self,
        size,
        rng,
        in_channels=32,
        channels=(32, 64, 128),
        residual_blocks=3,
        out_channels=3,
        slope=0.2,
    ):
        require(len(channels) == 3, "channels", "expected 3 generator channel counts")
        self._size = size
        self._in_channels = in_channels
        self._slope = slope

        down = []
        previous = in_channels
        for count in channels:
            down.append(Conv2d(previous, count, KERNEL, rng, stride=2, padding=1))
            previous = count
        self.down = ModuleList(down)
        self.residual = ModuleList(
            ResidualBlock(previous, rng, slope) for _ in range(residual_blocks)
        )
        targets = list(reversed(channels[:-1])) + [out_channels]
        up = []
        for count in targets:
            up.append(
                ConvTranspose2d(previous, count, KERNEL, rng, stride=2, padding=1)
            )
            previous = count
        self.up = ModuleList(up)

    def forward(self, x):
        require(
            x.ndim == 4 and x.shape[1:] == (self._in_channels, self._size, self._size),
            "assembled",
            "expected [N, {}, {}, {}], got {}",
            self._in_channels,
            self._size,
            self._size,
            x.shape,
        )
        shapes = []
        for block in self.down:
            shapes.append(x.shape[2:])
            x = ops.leaky_relu(block(x), self._slope)
        for block in self.residual:
            x = block(x)
        for index, block in enumerate(self.up):
            target = shapes.pop()
            x = block(x, block.output_padding_for(target, x.shape[2:]))
            if index < len(self.up) - 1:
                x = ops.leaky_relu(x, self._slope)
        return ops.sigmoid(x)


class Discriminator(Module):
    """Strided convolutions, global average pooling and a linear score
    squashed to (0, 1).

    :param with_sketch: Adds the sketch as a fourth input channel.
    """

    def __init__(self, rng, channels=(32, 64, 128, 128), with_sketch=False, slope=0.2):
        require(
            len(channels) == 4, "channels", "expected 4 discriminator channel counts"
        )
        self._with_sketch = with_sketch
        self._slope = slope
        previous = 4 if with_sketch else 3
        self._in_channels = previous
        blocks = []
        for count in channels:
            blocks.append(Conv2d(previous, count, KERNEL, rng, stride=2, padding=1))
            previous = count
        self.blocks = ModuleList(blocks)
        self.score = Linear(previous, 1, rng, scale=0.01)

    @property
    def with_sketch(self):
        return self._with_sketch

    def forward(self, image, sketch=None):
        if self._with_sketch:
            require(sketch is not None, "sketch", "this discriminator needs the sketch")
            image = ops.concat([image, sketch], axis=1)
        require(
            image.ndim == 4 and image.shape[1] == self._in_channels,
            "image",
            "expected [N, {}, H, W], got {}",
            self._in_channels,
            image.shape,
        )
        x = image
        for block in self.blocks:
            x = ops.leaky_relu(block(x), self._slope)
        n, c = x.shape[:2]
        pooled = ops.reshape(ops.global_pool(x, "avg"), (n, c))
        return ops.reshape(ops.sigmoid(self.score(pooled)), (n,))


def generate(assembled, params):
    """Runs the generator ``params`` on an assembled feature stack."""
    return params(assembled)


def discriminate(image, params, sketch=None):
    """Probability that ``image`` is a real photo."""
    return params(image, sketch)
