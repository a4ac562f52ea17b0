# -*- coding: utf-8 -*-
"""
ca2n
~~~~

Component-attention autoencoders and noise-induced adversarial
generation for turning face sketches into colour photos.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

__version__ = "0.3.0"

import logging

logger = logging.getLogger(__name__)

from ca2n.app import create_runtime  # noqa
