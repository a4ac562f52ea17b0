# -*- coding: utf-8 -*-
"""
ca2n.stage1
~~~~~~~~~~~

Stage 1: one attention-augmented autoencoder per face component,
trained to reconstruct component sketches.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

from .attention import CBAM, ChannelGate, SpatialGate, cbam  # noqa
from .autoencoder import (  # noqa
    AutoencoderSet,
    ComponentAutoencoder,
    ComponentDecoder,
    ComponentDict,
    ComponentEncoder,
    Expander,
    decode,
    encode,
    encoder_shapes,
)
from .training import (  # noqa
    Stage1Result,
    component_reconstructions,
    reconstruct,
    train_stage1,
)
