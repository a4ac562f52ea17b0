# -*- coding: utf-8 -*-
"""
ca2n.plugins
~~~~~~~~~~~~

Hook implementation marker used by ca2n and its plugins.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""
import logging

from pluggy import HookimplMarker

impl = HookimplMarker("ca2n")

logger = logging.getLogger(__name__)
