"""
ca2n.configs.desk
~~~~~~~~~~~~~~~~~

Desk-scale preset: 64x64 frames and 64 dimensional latents, small enough
to train both stages on a laptop CPU.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

from ca2n.configs.default import DefaultConfig


class DeskConfig(DefaultConfig):
    RESOLUTION = 64
    LATENT_DIM = 64
    ENCODER_CHANNELS = (16, 32, 64, 64, 64)
    CBAM_REDUCTION = 8
    STAGE1_EPOCHS = 60

    MAPPER_CHANNELS = (64, 64, 32, 32)
    GENERATOR_CHANNELS = (32, 64, 64)
    DISCRIMINATOR_CHANNELS = (16, 32, 64, 64)
    EXTRACTOR_CHANNELS = (8, 16, 32, 32)

    BATCH_SIZE = 8
    LEARNING_RATE = 1e-3
