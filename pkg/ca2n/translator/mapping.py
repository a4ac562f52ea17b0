# -*- coding: utf-8 -*-
"""
ca2n.translator.mapping
~~~~~~~~~~~~~~~~~~~~~~~

Feature mapping: per-component decoders that turn latent descriptors
into spatial feature maps, and their assembly into one frame-sized
stack.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

import logging

from ..core.exceptions import require
from ..facelayout import ComponentId
from ..facelayout import assemble as paste_maps
from ..stage1.autoencoder import ComponentDict, Expander, encoder_shapes
from ..utils.helpers import seeded_rng

logger = logging.getLogger(__name__)


class FeatureMapper(Expander):
    """Latent descriptor to a ``[N, F, h, w]`` map at the component box
    size.

    :param channels: Four channel counts after the linear expansion; the
        last two transposed convolutions emit ``feature_channels``.
    """

    def __init__(
        self,
        box_shape,
        latent_dim,
        rng,
        channels=(256, 256, 128, 64),
        feature_channels=32,
        slope=0.2,
    ):
        plan = tuple(channels) + (feature_channels, feature_channels)
        super(FeatureMapper, self).__init__(
            latent_dim, encoder_shapes(box_shape), plan, rng, slope, final=None
        )
        self.feature_channels = feature_channels


class MapperSet(ComponentDict):
    """One :class:`FeatureMapper` per face component."""

    @classmethod
    def build(cls, layout, config):
        mappers = {}
        for component in ComponentId:
            mappers[component] = FeatureMapper(
                layout[component].shape,
                config.latent_dim,
                seeded_rng(config.seed, "mapper", component.value),
                channels=config.mapper_channels,
                feature_channels=config.feature_channels,
                slope=config.leaky_slope,
            )
        return cls(mappers)


def map_features(latent, component, params):
    """Maps ``[N, d]`` latents of ``component`` to its feature map.

    :param params: A :class:`MapperSet` or the component's
        :class:`FeatureMapper`.
    """
    mapper = params[component] if isinstance(params, MapperSet) else params
    return mapper(latent)


def assemble(maps, layout):
    """Pastes the component feature maps into the remainder map."""
    remainder = maps.get(ComponentId.REMAINDER)
    require(remainder is not None, "maps", "the remainder map is required")
    require(
        remainder.ndim == 4 and remainder.shape[2:] == (layout.size, layout.size),
        "remainder",
        "expected a [N, F, {0}, {0}] map, got {1}",
        layout.size,
        remainder.shape,
    )
    for component, feature_map in maps.items():
        require(
            feature_map.shape[:2] == remainder.shape[:2],
            component.value,
            "map {} does not match the remainder channels {}",
            feature_map.shape,
            remainder.shape,
        )
    return paste_maps(maps, layout)
