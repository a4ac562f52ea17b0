# -*- coding: utf-8 -*-
"""
ca2n.utils.helpers
~~~~~~~~~~~~~~~~~~

A few helpers that are used by ca2n

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

import ast
import logging
import os
import zlib

import numpy as np

logger = logging.getLogger(__name__)


def to_bytes(text, encoding="utf-8"):
    """Transform string to bytes."""
    if isinstance(text, str):
        text = text.encode(encoding)
    return text


def seeded_rng(seed, *labels):
    """Returns a random generator derived from ``seed`` and ``labels``.

    Distinct labels give independent streams, so adding a component or a
    network never shifts the random numbers another one draws::

        rng = seeded_rng(7, "stage1", "left_eye")
    """
    entropy = [int(seed)] + [zlib.crc32(to_bytes(str(label))) for label in labels]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def config_from_env(prefix="CA2N_", environ=None):
    """Retrieves configuration variables from the environment.
    Set your environment variables like this::

        export CA2N_BATCH_SIZE=8

    Values are parsed as python literals where possible and kept as
    strings otherwise.

    :param prefix: The prefix of the environment variables.
    :returns: ``{KEY: value}`` with the prefix stripped.
    """
    environ = os.environ if environ is None else environ
    config = {}
    for key, value in environ.items():
        if key.startswith(prefix):
            key = key[len(prefix) :]
            try:
                value = ast.literal_eval(value)
            except (ValueError, SyntaxError):
                pass
            config[key] = value
    return config


def ensure_dir(path):
    """Creates ``path`` (and parents) if it does not exist yet."""
    os.makedirs(path, exist_ok=True)
    return path
