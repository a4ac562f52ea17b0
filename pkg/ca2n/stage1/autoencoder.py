# -*- coding: utf-8 -*-
"""
ca2n.stage1.autoencoder
~~~~~~~~~~~~~~~~~~~~~~~

Per-component encoders and decoders. An encoder runs five stride-2
convolution blocks (each optionally followed by attention) and projects
to a latent descriptor; a decoder mirrors the recorded geometry back to
the component box.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

import logging

from ..core.exceptions import require
from ..facelayout import ComponentId
from ..numerics import (
    Conv2d,
    ConvTranspose2d,
    Linear,
    Module,
    ModuleDict,
    ModuleList,
    ops,
)
from ..numerics.ops import conv_output_size
from ..utils.helpers import seeded_rng
from .attention import CBAM

logger = logging.getLogger(__name__)

KERNEL = 3
STRIDE = 2
PADDING = 1
LAYERS = 5


def encoder_shapes(box_shape, layers=LAYERS):
    """Spatial ``(h, w)`` after each encoding layer, starting with the
    box itself."""
    shapes = [tuple(box_shape)]
    for _ in range(layers):
        h, w = shapes[-1]
        shapes.append(
            (
                conv_output_size(h, KERNEL, STRIDE, PADDING),
                conv_output_size(w, KERNEL, STRIDE, PADDING),
            )
        )
    return shapes


class EncoderBlock(Module):
    def __init__(self, in_channels, out_channels, rng, slope=0.2, attention=None):
        self.conv = Conv2d(in_channels, out_channels, KERNEL, rng, STRIDE, PADDING)
        self._slope = slope
        if attention is not None:
            self.cbam = CBAM(out_channels, rng, **attention)

    def forward(self, x):
        x = ops.leaky_relu(self.conv(x), self._slope)
        cbam = getattr(self, "cbam", None)
        return cbam(x) if cbam is not None else x


class ComponentEncoder(Module):
    """Maps a ``[N, C, h, w]`` component patch to ``[N, d]`` latents.

    :param box_shape: ``(h, w)`` of the component box.
    :param channels: Five output channel counts, one per encoding layer.
    :param attention: ``None`` or CBAM options (``reduction``,
        ``kernel_size``) applied after every layer enabled in ``layers``.
    """

    def __init__(
        self,
        box_shape,
        latent_dim,
        rng,
        channels=(32, 64, 128, 256, 256),
        in_channels=1,
        slope=0.2,
        attention=None,
        attention_layers=(True,) * LAYERS,
    ):
        require(
            len(channels) == LAYERS,
            "channels",
            "expected {} encoder channel counts, got {}",
            LAYERS,
            len(channels),
        )
        self._shapes = encoder_shapes(box_shape)
        self._in_channels = in_channels
        blocks = []
        previous = in_channels
        for index, count in enumerate(channels):
            use = attention is not None and attention_layers[index]
            blocks.append(
                EncoderBlock(
                    previous, count, rng, slope, attention if use else None
                )
            )
            previous = count
        self.blocks = ModuleList(blocks)
        h, w = self._shapes[-1]
        self.fc = Linear(previous * h * w, latent_dim, rng)

    @property
    def shapes(self):
        return list(self._shapes)

    @property
    def latent_dim(self):
        return self.fc.out_features

    def forward(self, x):
        expected = (self._in_channels,) + self._shapes[0]
        require(
            x.ndim == 4 and x.shape[1:] == expected,
            "patch",
            "expected [N, {}, {}, {}], got {}",
            expected[0],
            expected[1],
            expected[2],
            x.shape,
        )
        for block in self.blocks:
            x = block(x)
        return self.fc(ops.flatten(x))


class Expander(Module):
    """Latent vector to spatial map: a linear expansion to the smallest
    encoder grid, then five transposed convolutions retracing the encoder
    shapes.

    :param shapes: Encoder shapes as returned by :func:`encoder_shapes`.
    :param plan: Six channel counts, from the expanded grid down to the
        output.
    :param final: ``"sigmoid"`` for images, ``None`` for feature maps.
    """

    def __init__(self, latent_dim, shapes, plan, rng, slope=0.2, final="sigmoid"):
        require(
            len(plan) == LAYERS + 1,
            "plan",
            "expected {} channel counts, got {}",
            LAYERS + 1,
            len(plan),
        )
        self._shapes = list(shapes)
        self._plan = tuple(plan)
        self._slope = slope
        self._final = final
        h, w = self._shapes[-1]
        self.fc = Linear(latent_dim, plan[0] * h * w, rng)
        self.blocks = ModuleList(
            ConvTranspose2d(plan[i], plan[i + 1], KERNEL, rng, STRIDE, PADDING)
            for i in range(LAYERS)
        )

    def forward(self, latent):
        require(
            latent.ndim == 2 and latent.shape[1] == self.fc.in_features,
            "latent",
            "expected latents of length {}, got shape {}",
            self.fc.in_features,
            latent.shape,
        )
        n = latent.shape[0]
        h, w = self._shapes[-1]
        x = ops.leaky_relu(self.fc(latent), self._slope)
        x = ops.reshape(x, (n, self._plan[0], h, w))
        for index, block in enumerate(self.blocks):
            target = self._shapes[LAYERS - 1 - index]
            x = block(x, block.output_padding_for(target, x.shape[2:]))
            if index < LAYERS - 1:
                x = ops.leaky_relu(x, self._slope)
        if self._final == "sigmoid":
            x = ops.sigmoid(x)
        return x


class ComponentDecoder(Expander):
    """Mirrors a :class:`ComponentEncoder` back to a patch in (0, 1)."""

    def __init__(self, encoder, rng, out_channels=1, slope=0.2):
        channels = [block.conv.out_channels for block in encoder.blocks]
        plan = list(reversed(channels)) + [out_channels]
        super(ComponentDecoder, self).__init__(
            encoder.latent_dim, encoder.shapes, plan, rng, slope, final="sigmoid"
        )


class ComponentAutoencoder(Module):
    def __init__(self, encoder, decoder):
        self.encoder = encoder
        self.decoder = decoder

    def forward(self, x):
        return self.decoder(self.encoder(x))


class ComponentDict(ModuleDict):
    """Modules keyed by face component. Parameter names start with the
    component value (``left_eye.encoder.fc.weight``)."""

    def __init__(self, modules):
        super(ComponentDict, self).__init__(
            (component.value, modules[component]) for component in ComponentId
        )

    def __getitem__(self, component):
        if isinstance(component, ComponentId):
            component = component.value
        return super(ComponentDict, self).__getitem__(component)


class AutoencoderSet(ComponentDict):
    """One :class:`ComponentAutoencoder` per face component."""

    def encoders(self):
        return ComponentDict({c: self[c].encoder for c in ComponentId})

    @classmethod
    def build(cls, layout, config):
        """Creates freshly initialised autoencoders for ``layout``."""
        attention = None
        if config.cbam:
            attention = {
                "reduction": config.cbam_reduction,
                "kernel_size": config.cbam_kernel,
            }
        autoencoders = {}
        for component in ComponentId:
            rng = seeded_rng(config.seed, "stage1", component.value)
            encoder = ComponentEncoder(
                layout[component].shape,
                config.latent_dim,
                rng,
                channels=config.encoder_channels,
                slope=config.leaky_slope,
                attention=attention,
                attention_layers=config.cbam_layers,
            )
            decoder = ComponentDecoder(encoder, rng, slope=config.leaky_slope)
            autoencoders[component] = ComponentAutoencoder(encoder, decoder)
        return cls(autoencoders)


def encode(component_patch, params):
    """Encodes a ``[N, 1, h, w]`` patch into ``[N, d]`` latents."""
    return params(component_patch)


def decode(latent, params):
    """Decodes ``[N, d]`` latents into ``[N, 1, h, w]`` patches."""
    return params(latent)
