# -*- coding: utf-8 -*-
"""
ca2n.configs.default
~~~~~~~~~~~~~~~~~~~~

This is the default configuration for ca2n. You can override these
configuration variables in another class, in a config file or through
``CA2N_`` prefixed environment variables.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

import os


class DefaultConfig(object):
    # Get the project root path
    #            <_basedir>
    # ../../ -->  ca2n/ca2n/configs/default.py
    basedir = os.path.join(
        os.path.abspath(os.path.dirname(os.path.dirname(os.path.dirname(__file__))))
    )

    # Reproducibility
    # ------------------------------
    # Every command derives all of its randomness from this seed. There is
    # no wall-clock fallback, a command refuses to run without it.
    SEED = None

    # Frame and layout
    # ------------------------------
    # Side length S of the square face frame. Must be >= 32 and divisible by 4.
    RESOLUTION = 128

    # Fractional (x, y, w, h) boxes of the face components. None uses the
    # built-in canonical layout. Override with a dict, e.g.
    # LAYOUT = {"left_eye": (0.15, 0.3, 0.25, 0.2)}
    LAYOUT = None

    # Stage 1: component autoencoders
    # ------------------------------
    LATENT_DIM = 512
    ENCODER_CHANNELS = (32, 64, 128, 256, 256)
    LEAKY_SLOPE = 0.2
    # Attention after the encoding layers, and which of the five get it.
    CBAM = True
    CBAM_LAYERS = (True, True, True, True, True)
    CBAM_REDUCTION = 8
    CBAM_KERNEL = 7
    STAGE1_EPOCHS = 50

    # Stage 2: feature mapping, generator and discriminator
    # ------------------------------
    # The last mapper block always emits FEATURE_CHANNELS channels.
    MAPPER_CHANNELS = (256, 256, 128, 64)
    FEATURE_CHANNELS = 32
    GENERATOR_CHANNELS = (32, 64, 128)
    GENERATOR_RESIDUAL_BLOCKS = 3
    DISCRIMINATOR_CHANNELS = (32, 64, 128, 128)
    # Feed the sketch to the discriminator as an extra channel.
    DISCRIMINATOR_SKETCH = False
    STAGE2_STEPS = 2000

    # Fixed random feature network used by the perceptual loss and the
    # Frechet proxy, one entry per conv + relu + avg-pool block.
    EXTRACTOR_CHANNELS = (16, 32, 64, 64)

    # Noise induction
    NOISE_EPSILON = 0.05

    # Loss weights
    W_CONTENT = 100.0
    W_ADV = 1.0
    W_PERC = 1.0
    W_INDUCED = 1.0
    W_STR = 1.0

    # Ablation
    # ------------------------------
    # DA enables the noise-induced loss, GL the perceptual and structural
    # terms, IE the enhancement hook. The LOSS_* switches refine DA and GL
    # per loss term.
    DA = True
    GL = True
    IE = True
    LOSS_INDUCED = True
    LOSS_PERCEPTUAL = True
    LOSS_STRUCTURAL = True

    # Optimisation
    # ------------------------------
    BATCH_SIZE = 8
    LEARNING_RATE = 2e-4
    ADAM_BETA1 = 0.9
    ADAM_BETA2 = 0.999
    ADAM_EPS = 1e-8
    # Steps between two rows of the loss log.
    LOG_INTERVAL = 10
    # Worker threads for the independent stage 1 autoencoders.
    THREADS = 1

    # Data
    # ------------------------------
    SPLIT_RATIO = (10, 1)
    SKETCH_STYLE = "dog"
    DATA_DIR = os.path.join(basedir, "data")
    CHECKPOINT_DIR = os.path.join(basedir, "checkpoints")
    REPORT_DIR = os.path.join(basedir, "reports")

    # Enhancement hook
    # ------------------------------
    # identity, unsharp, external or a mode contributed by a plugin.
    HOOK = "identity"
    HOOK_AMOUNT = 1.0
    HOOK_RADIUS = 1.0
    HOOK_COMMAND = None
    HOOK_TIMEOUT = 300
    # Mode the IE rows of the ablation table run; never the identity.
    ABLATION_HOOK = "unsharp"

    # Logging Settings
    # ------------------------------
    # Logging Config Path
    # see https://docs.python.org/library/logging.config.html#logging.config.fileConfig
    # for more details. Should either be None or a path to a file.
    # If this is set to a path, consider setting USE_DEFAULT_LOGGING to False
    # otherwise there may be interactions between the log configuration file
    # and the default logging setting.
    LOG_CONF_FILE = None

    # Path to store the training logs
    LOG_PATH = os.path.join(basedir, "logs")

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
        "loggers": {
            "ca2n": {
                "handlers": ["console"],
                "level": "INFO",
                "propagate": False,
            },
        },
    }

    # Also write everything to a rotating ca2n.log under LOG_PATH.
    LOG_TO_FILE = False

    # When set to True this will enable the default
    # ca2n logging configuration which uses the settings
    # above to determine logging
    USE_DEFAULT_LOGGING = True
