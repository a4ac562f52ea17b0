"""
ca2n.configs.testing
~~~~~~~~~~~~~~~~~~~~

This is ca2n's testing config, a micro-scale network that trains in
seconds.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

from ca2n.configs.default import DefaultConfig


class TestingConfig(DefaultConfig):
    SEED = 1234

    RESOLUTION = 32
    LATENT_DIM = 8
    ENCODER_CHANNELS = (8, 8, 16, 16, 16)
    CBAM_REDUCTION = 4
    CBAM_KERNEL = 3
    STAGE1_EPOCHS = 2

    MAPPER_CHANNELS = (16, 16, 8, 8)
    FEATURE_CHANNELS = 32
    GENERATOR_CHANNELS = (8, 16, 16)
    GENERATOR_RESIDUAL_BLOCKS = 1
    DISCRIMINATOR_CHANNELS = (8, 8, 16, 16)
    EXTRACTOR_CHANNELS = (4, 8, 8, 8)
    STAGE2_STEPS = 2

    BATCH_SIZE = 2
    LEARNING_RATE = 1e-3
    LOG_INTERVAL = 1

    LOG_DEFAULT_CONF = {
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {
            "standard": {
                "format": "%(asctime)s %(levelname)-7s %(name)-25s %(message)s"
            },
        },
        "handlers": {
            "console": {
                "level": "NOTSET",
                "formatter": "standard",
                "class": "logging.StreamHandler",
            },
        },
        # TESTING: Log to console only
        "loggers": {
            "ca2n": {
                "handlers": ["console"],
                "level": "WARNING",
                "propagate": True,
            },
        },
    }
